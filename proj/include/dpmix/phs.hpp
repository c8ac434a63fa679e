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

#ifndef DPMIX_PHS_HPP
#define DPMIX_PHS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dpmix/budget.hpp"
#include "dpmix/models.hpp"
#include "dpmix/rng.hpp"

namespace dpmix {

// Private hypothesis selection: a pairwise Scheffe tournament scored under
// the exponential mechanism. Given budget (eps, delta), selection itself is
// pure (eps/2)-DP: utility = number of non-losses, sensitivity 1, mechanism
// parameter eps/2, so candidate weights are exp(eps * score / 4).

enum class ContestOutcome { kFirstWins, kSecondWins, kDraw };

// Scheffe contest on A = {x : f_i(x) > f_j(x)}: compares the empirical mass
// of A against its masses under f_i and f_j. The closer model wins if it
// clears the other by margin alpha/4; otherwise a draw. Univariate pairs use
// exact interval masses; otherwise Monte-Carlo with `effort` draws per model
// (throws ResolutionError when 0.5/sqrt(effort) > alpha/16).
ContestOutcome pairwise_contest(const Model& fi, const Model& fj,
                                const Dataset& data, double alpha, long effort,
                                RandomStream& rng);

struct PhsOptions {
  long effort = 100000;            // Monte-Carlo effort for non-1d masses
  std::string contest_matrix_csv;  // when set, dump the W/L/D matrix here
  bool parallel = true;
};

struct PhsResult {
  Model selected;
  std::size_t index = 0;          // position in the canonical candidate order
  // Utility per canonical candidate: the number of data points that must
  // change before it loses some contest by the margin (capped at n).
  // Sensitivity 1 under a one-point change.
  std::vector<long long> scores;
  std::vector<Model> canonical;   // sorted, exact-deduplicated input
  PrivacyBudget spent;            // (eps/2, 0)
};

// Contract: with probability >= 1 - beta/2 the selected f has
// d_TV(g, f) <= 3 d_TV(g, F) + alpha/2 once n = Omega(log(M/beta)/alpha^2 +
// log(M/beta)/(alpha eps)). Candidates are canonicalized (sorted by
// parameters, deduplicated) before scoring, so relabeling the input permutes
// nothing observable.
PhsResult phs_select(const PrivacyBudget& budget, double alpha, double beta,
                     const std::vector<Model>& hypotheses, const Dataset& data,
                     RandomStream& rng, const PhsOptions& options = {});

// One exponential-mechanism draw over utility scores at privacy parameter
// `epsilon` (sensitivity 1): index i wins with probability proportional to
// exp(epsilon * scores[i] / 2), computed in log space.
std::size_t exponential_mechanism_index(std::span<const long long> scores,
                                        double epsilon, RandomStream& rng);

// Sample bound for the PHS contract at constant C.
std::size_t phs_sample_bound(double alpha, double beta, double epsilon,
                             std::size_t num_hypotheses,
                             double sample_constant = kDefaultSampleConstant);

}  // namespace dpmix

#endif  // DPMIX_PHS_HPP
