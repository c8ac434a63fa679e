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

#ifndef DPMIX_HISTOGRAM_HPP
#define DPMIX_HISTOGRAM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>

#include "dpmix/budget.hpp"
#include "dpmix/rng.hpp"

namespace dpmix {

// A countable family of disjoint bins. Two kinds are used by the decoders:
//   unit-width translates  B_i = ((i-0.5)w, (i+0.5)w]   covering R
//   dyadic-positive        B_i = (2^i, 2^{i+1}]         covering R_{>0}
struct BinPartition {
  enum class Kind { kUnitWidth, kDyadic };

  Kind kind = Kind::kUnitWidth;
  double width = 1.0;  // bin width for unit-width translates; unused otherwise

  static BinPartition unit_width(double w);
  static BinPartition dyadic() { return {Kind::kDyadic, 0.0}; }

  // The unique bin containing x, or nullopt when x is outside the partition's
  // domain (x <= 0 in dyadic mode).
  std::optional<std::int64_t> index(double x) const;

  // Half-open bounds of bin i: (lower, upper].
  std::pair<double, double> bounds(std::int64_t i) const;
};

// Index of the bin whose center i*w is nearest to mu; exact .5 ties round
// toward +infinity. Used by accuracy analyses and tests, not by data binning.
std::int64_t nearest_unit_bin(double mu, double width);

// Inverse CDF of the zero-mean Laplace distribution with the given scale,
// evaluated at u in (0,1). The u=0.5 median maps to 0 exactly.
double laplace_inverse_cdf(double u, double scale);

// One Laplace(0, scale) draw via inverse-CDF transform of a single 64-bit
// uniform, so seeded runs are bit-reproducible across platforms.
double sample_laplace(double scale, RandomStream& rng);

// Output of the stability-based histogram. Absent indices are implicitly 0;
// every reported estimate exceeds `threshold`.
struct HistogramEstimate {
  std::map<std::int64_t, double> estimates;
  double threshold = 0.0;
  double eta = 0.0;       // target accuracy the caller planned for
  std::size_t n = 0;      // dataset size

  double at(std::int64_t i) const {
    auto it = estimates.find(i);
    return it == estimates.end() ? 0.0 : it->second;
  }
};

// (eps, delta)-DP histogram over a countable bin family: adds Laplace(2/(eps n))
// noise to each occupied bin's empirical frequency and reports only results
// above t = 1/n + 2 ln(2/delta)/(eps n). With probability >= 1-beta all bins
// satisfy |p_bar_i - p_tilde_i| <= eta once n >= C log(1/(beta delta))/(eta eps).
HistogramEstimate stable_histogram(const PrivacyBudget& budget, double eta,
                                   double beta, std::span<const double> data,
                                   const BinPartition& bins, RandomStream& rng);

// Smallest n meeting the histogram accuracy precondition at constant C.
std::size_t stable_histogram_sample_bound(
    const PrivacyBudget& budget, double eta, double beta,
    double sample_constant = kDefaultSampleConstant);

}  // namespace dpmix

#endif  // DPMIX_HISTOGRAM_HPP
