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

#include "dpmix/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpmix/errors.hpp"

namespace dpmix {

BinPartition BinPartition::unit_width(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw InvalidParameterError("bin width must be positive and finite");
  }
  return {Kind::kUnitWidth, w};
}

std::optional<std::int64_t> BinPartition::index(double x) const {
  if (!std::isfinite(x)) {
    throw NumericError("cannot bin a non-finite sample");
  }
  if (kind == Kind::kUnitWidth) {
    // x in ((i-0.5)w, (i+0.5)w]  <=>  i = ceil(x/w - 0.5)
    const double scaled = x / width;
    if (std::abs(scaled) >= 0x1.0p62) {
      throw NumericError("sample too large for 64-bit bin index");
    }
    return static_cast<std::int64_t>(std::ceil(scaled - 0.5));
  }
  // Dyadic bins cover R_{>0} only.
  if (!(x > 0.0)) return std::nullopt;
  int exp = 0;
  const double mant = std::frexp(x, &exp);  // x = mant * 2^exp, mant in [0.5,1)
  // Exact powers of two sit at the closed right end of the bin below.
  return mant == 0.5 ? static_cast<std::int64_t>(exp) - 2
                     : static_cast<std::int64_t>(exp) - 1;
}

std::pair<double, double> BinPartition::bounds(std::int64_t i) const {
  if (kind == Kind::kUnitWidth) {
    const double c = static_cast<double>(i) * width;
    return {c - 0.5 * width, c + 0.5 * width};
  }
  return {std::ldexp(1.0, static_cast<int>(i)),
          std::ldexp(1.0, static_cast<int>(i) + 1)};
}

std::int64_t nearest_unit_bin(double mu, double width) {
  if (!(width > 0.0)) {
    throw InvalidParameterError("bin width must be positive");
  }
  return static_cast<std::int64_t>(std::floor(mu / width + 0.5));
}

double laplace_inverse_cdf(double u, double scale) {
  if (!(scale > 0.0)) {
    throw InvalidParameterError("laplace scale must be positive");
  }
  if (!(u > 0.0) || !(u < 1.0)) {
    throw InvalidParameterError("laplace inverse CDF needs u in (0,1)");
  }
  const double centered = u - 0.5;
  if (centered == 0.0) return 0.0;
  const double sign = centered > 0.0 ? 1.0 : -1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(centered));
}

double sample_laplace(double scale, RandomStream& rng) {
  return laplace_inverse_cdf(rng.uniform_open01(), scale);
}

HistogramEstimate stable_histogram(const PrivacyBudget& budget, double eta,
                                   double beta, std::span<const double> data,
                                   const BinPartition& bins,
                                   RandomStream& rng) {
  if (data.empty()) {
    throw InvalidInputError("stable_histogram requires nonempty data");
  }
  if (!(eta > 0.0) || !(eta < 1.0) || !(beta > 0.0) || !(beta < 1.0)) {
    throw InvalidParameterError("eta and beta must lie in (0,1)");
  }
  validate_entry_budget(budget, data.size());

  const double n = static_cast<double>(data.size());

  // Empirical frequencies of occupied bins. Samples outside the partition's
  // domain (only possible in dyadic mode) fall in no bin.
  std::map<std::int64_t, std::size_t> counts;
  for (double x : data) {
    if (auto i = bins.index(x)) ++counts[*i];
  }

  HistogramEstimate out;
  out.eta = eta;
  out.n = data.size();
  out.threshold =
      1.0 / n + 2.0 * std::log(2.0 / budget.delta) / (budget.epsilon * n);

  const double noise_scale = 2.0 / (budget.epsilon * n);
  // std::map iteration is index-ordered, so the noise draws are consumed in a
  // deterministic order for a fixed stream.
  for (const auto& [i, count] : counts) {
    const double freq = static_cast<double>(count) / n;
    const double noisy = freq + sample_laplace(noise_scale, rng);
    if (noisy >= out.threshold) {
      out.estimates[i] = std::min(noisy, 1.0);
    }
  }
  return out;
}

std::size_t stable_histogram_sample_bound(const PrivacyBudget& budget,
                                          double eta, double beta,
                                          double sample_constant) {
  const double bound = sample_constant *
                       std::log(1.0 / (beta * budget.delta)) /
                       (eta * budget.epsilon);
  return static_cast<std::size_t>(std::ceil(std::max(1.0, bound)));
}

}  // namespace dpmix
