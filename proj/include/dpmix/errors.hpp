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

#ifndef DPMIX_ERRORS_HPP
#define DPMIX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dpmix {

// Base class for all library errors. Each subclass maps to a stable CLI
// exit code (see cli.hpp).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A parameter is outside its documented domain (e.g. non-positive scale,
// gamma outside (0,1), epsilon0 > 1).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// The data does not satisfy an operation's precondition (empty dataset,
// odd-size pairing input, ragged rows, insufficient samples for a split).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A privacy accounting rule was violated (delta >= 1/n at an entry point,
// or a recomposed ledger exceeding its input budget).
class BudgetViolationError : public Error {
 public:
  using Error::Error;
};

// A candidate-set size bound was exceeded.
class CandidateOverflowError : public Error {
 public:
  using Error::Error;
};

// A list decoder failed upstream of the learner (empty candidate set).
class DecoderFailureError : public Error {
 public:
  using Error::Error;
};

// A Monte-Carlo effort budget is too small to resolve a contest margin.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Non-finite densities or other numeric breakdown.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (JSON schema or CSV); message carries the field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Dataset smaller than the sample-size plan and --force not given.
class PlanError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpmix

#endif  // DPMIX_ERRORS_HPP
