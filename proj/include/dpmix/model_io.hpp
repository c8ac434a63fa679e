// Copyright 2026 The dpmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPMIX_MODEL_IO_HPP
#define DPMIX_MODEL_IO_HPP

#include <string>

#include <json.hpp>

#include "dpmix/models.hpp"

namespace dpmix {

// Model JSON schema (see README for the full grammar):
//   {"type":"gaussian", "mus":[...], "sigmas":[...]}
//   {"type":"point",    "mus":[...]}
//   {"type":"mixture",  "weights":[...], "mus":[[...],...], "sigmas":[[...],...]}
//   {"type":"mixture",  "weights":[...], "components":[{...},...]}
//   {"type":"corrupted","gamma":g, "target":{...}, "contaminant":{...}}
// Gaussian mixtures always serialize to the compact mus/sigmas form.
nlohmann::json model_to_json(const Model& model);
nlohmann::json source_to_json(const CorruptedSource& source);

// Parse errors carry the offending field path.
Model model_from_json(const nlohmann::json& j);
// Accepts either a plain model (gamma = 0) or a corrupted-source document.
CorruptedSource source_from_json(const nlohmann::json& j);

Model read_model_file(const std::string& path);
CorruptedSource read_source_file(const std::string& path);

// Datasets are CSV, one sample per row, d decimal-float columns, and an
// optional header row which is detected and skipped on read.
Dataset read_csv(const std::string& path);
std::string dataset_to_csv(const Dataset& data);

// All file writes go through a temp file plus atomic rename, so failed runs
// leave no partial outputs.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace dpmix

#endif  // DPMIX_MODEL_IO_HPP
