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

#ifndef DPMIX_CLI_HPP
#define DPMIX_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dpmix::cli {

// Stable exit-code taxonomy (documented in --help and the README).
inline constexpr int kOk = 0;
inline constexpr int kGenericError = 1;
inline constexpr int kInputError = 2;       // missing/ragged/empty data
inline constexpr int kParseError = 3;       // malformed JSON/CSV
inline constexpr int kParameterError = 4;   // parameter out of domain
inline constexpr int kBudgetError = 5;      // privacy accounting violation
inline constexpr int kPlanError = 6;        // under-sampled without --force
inline constexpr int kDecoderFailure = 7;   // decoder returned empty
inline constexpr int kOverflowError = 8;    // candidate-set overflow
inline constexpr int kResolutionError = 9;  // Monte-Carlo effort too small

// Entry point shared by the binary and the tests. argv excludes the program
// name. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace dpmix::cli

#endif  // DPMIX_CLI_HPP
