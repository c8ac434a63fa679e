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

#include "dpmix/phs.hpp"

#include <algorithm>
#include <cmath>

#include "dpmix/errors.hpp"
#include "dpmix/model_io.hpp"
#include "dpmix/parallel.hpp"
#include "dpmix/tv.hpp"

namespace dpmix {

namespace {

struct ContestInputs {
  double mass_i = 0.0;   // P_{f_i}(A)
  double mass_j = 0.0;   // P_{f_j}(A)
  double empirical = 0.0;
};

ContestOutcome decide(const ContestInputs& in, double margin) {
  const double di = std::abs(in.empirical - in.mass_i);
  const double dj = std::abs(in.empirical - in.mass_j);
  if (di < dj - margin) return ContestOutcome::kFirstWins;
  if (dj < di - margin) return ContestOutcome::kSecondWins;
  return ContestOutcome::kDraw;
}

// Number of data points that must change before the candidate with Scheffe
// mass `mine` loses to the one with mass `theirs` by `margin`: the distance
// from the empirical mass to the losing region, in 1/n steps. One changed
// point moves the empirical mass by 1/n, so this has sensitivity 1.
long long defeat_margin_points(double mine, double theirs, double empirical,
                               double margin, std::size_t n) {
  const double cap = static_cast<double>(n);
  if (std::abs(mine - theirs) <= margin) return static_cast<long long>(cap);
  // Losing region: empirical values strictly beyond the midpoint shifted by
  // margin/2 toward the opponent.
  double distance = 0.0;
  if (theirs > mine) {
    const double boundary = (mine + theirs + margin) / 2.0;
    if (boundary > 1.0) return static_cast<long long>(cap);
    distance = boundary - empirical;
  } else {
    const double boundary = (mine + theirs - margin) / 2.0;
    if (boundary < 0.0) return static_cast<long long>(cap);
    distance = empirical - boundary;
  }
  const double points = std::floor(std::max(0.0, distance) * cap);
  return static_cast<long long>(std::min(points, cap));
}

bool univariate_pair(const Model& a, const Model& b) {
  return dim(a) == 1 && dim(b) == 1 && density_evaluable(a) &&
         density_evaluable(b);
}

void check_resolution(double alpha, long effort) {
  if (0.5 / std::sqrt(static_cast<double>(effort)) > alpha / 16.0) {
    throw ResolutionError(
        "Monte-Carlo effort " + std::to_string(effort) +
        " cannot resolve the contest margin alpha/16; increase effort");
  }
}

}  // namespace

ContestOutcome pairwise_contest(const Model& fi, const Model& fj,
                                const Dataset& data, double alpha, long effort,
                                RandomStream& rng) {
  if (data.rows() == 0) {
    throw InvalidInputError("pairwise_contest requires nonempty data");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidParameterError("alpha must lie in (0,1)");
  }
  if (model_equal(fi, fj)) return ContestOutcome::kDraw;

  ContestInputs in;
  if (univariate_pair(fi, fj) && data.dim == 1) {
    const auto set = scheffe_intervals_1d(fi, fj);
    in.mass_i = interval_mass(fi, set);
    in.mass_j = interval_mass(fj, set);
    std::vector<double> sorted = data.values;
    std::sort(sorted.begin(), sorted.end());
    in.empirical = interval_empirical_mass(sorted, set);
  } else {
    check_resolution(alpha, effort);
    RandomStream ri = rng.split(1);
    RandomStream rj = rng.split(2);
    in.mass_i = scheffe_mass(fi, fi, fj, effort, ri);
    in.mass_j = scheffe_mass(fj, fi, fj, effort, rj);
    in.empirical = empirical_mass(data, fi, fj);
  }
  return decide(in, alpha / 4.0);
}

std::size_t exponential_mechanism_index(std::span<const long long> scores,
                                        double epsilon, RandomStream& rng) {
  if (scores.empty()) {
    throw InvalidInputError("mechanism needs at least one score");
  }
  const double scale = epsilon / 2.0;
  const long long max_score = *std::max_element(scores.begin(), scores.end());
  std::vector<double> weights(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(scale * static_cast<double>(scores[i] - max_score));
    total += weights[i];
  }
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

std::size_t phs_sample_bound(double alpha, double beta, double epsilon,
                             std::size_t num_hypotheses,
                             double sample_constant) {
  const double log_term =
      std::log(std::max<double>(2, num_hypotheses) / beta);
  const double bound = sample_constant * log_term *
                       (1.0 / (alpha * alpha) + 1.0 / (alpha * epsilon));
  return static_cast<std::size_t>(std::ceil(bound));
}

PhsResult phs_select(const PrivacyBudget& budget, double alpha, double beta,
                     const std::vector<Model>& hypotheses, const Dataset& data,
                     RandomStream& rng, const PhsOptions& options) {
  if (hypotheses.empty()) {
    throw InvalidInputError("hypothesis selection needs at least one model");
  }
  if (!(budget.epsilon > 0.0)) {
    throw InvalidParameterError("epsilon must be positive");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0) || !(beta > 0.0) || !(beta < 1.0)) {
    throw InvalidParameterError("alpha and beta must lie in (0,1)");
  }
  if (data.rows() == 0) {
    throw InvalidInputError("hypothesis selection requires nonempty data");
  }

  PhsResult result;
  result.spent = {budget.epsilon / 2.0, 0.0};

  // Canonical order plus exact dedup makes the selection distribution
  // invariant to relabeling of the input list.
  result.canonical = hypotheses;
  std::sort(result.canonical.begin(), result.canonical.end(), model_less);
  result.canonical.erase(std::unique(result.canonical.begin(),
                                     result.canonical.end(), model_equal),
                         result.canonical.end());
  const std::size_t m = result.canonical.size();

  if (m == 1) {
    result.selected = result.canonical[0];
    result.scores = {0};
    return result;
  }

  const bool all_univariate =
      data.dim == 1 &&
      std::all_of(result.canonical.begin(), result.canonical.end(),
                  [](const Model& h) {
                    return dim(h) == 1 && density_evaluable(h);
                  });
  if (!all_univariate) check_resolution(alpha, options.effort);

  std::vector<double> sorted1d;
  if (all_univariate) {
    sorted1d = data.values;
    std::sort(sorted1d.begin(), sorted1d.end());
  }

  const double margin = alpha / 4.0;
  const std::size_t pairs = m * (m - 1) / 2;
  std::vector<ContestInputs> inputs(pairs);
  auto pair_index = [m](std::size_t i, std::size_t j) {
    // i < j; row-major upper triangle.
    return i * (2 * m - i - 1) / 2 + (j - i - 1);
  };

  parallel_for(
      pairs,
      [&](std::size_t p) {
        // Invert the triangular index.
        std::size_t i = 0;
        std::size_t row_end = m - 1;
        std::size_t q = p;
        while (q >= row_end) {
          q -= row_end;
          ++i;
          --row_end;
        }
        const std::size_t j = i + 1 + q;

        const Model& fi = result.canonical[i];
        const Model& fj = result.canonical[j];
        ContestInputs in;
        if (all_univariate) {
          const auto set = scheffe_intervals_1d(fi, fj);
          in.mass_i = interval_mass(fi, set);
          in.mass_j = interval_mass(fj, set);
          in.empirical = interval_empirical_mass(sorted1d, set);
        } else {
          RandomStream ri = rng.split(2 * p + 10);
          RandomStream rj = rng.split(2 * p + 11);
          in.mass_i = scheffe_mass(fi, fi, fj, options.effort, ri);
          in.mass_j = scheffe_mass(fj, fi, fj, options.effort, rj);
          in.empirical = empirical_mass(data, fi, fj);
        }
        inputs[p] = in;
      },
      options.parallel);

  // Utility = worst-case defeat margin in data points across the M-1
  // contests (how many samples would have to change before the candidate
  // loses some contest). Sensitivity 1.
  const long long n_points = static_cast<long long>(data.rows());
  result.scores.assign(m, n_points);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const ContestInputs& in = inputs[pair_index(i, j)];
      result.scores[i] = std::min(
          result.scores[i], defeat_margin_points(in.mass_i, in.mass_j,
                                                 in.empirical, margin,
                                                 data.rows()));
      result.scores[j] = std::min(
          result.scores[j], defeat_margin_points(in.mass_j, in.mass_i,
                                                 in.empirical, margin,
                                                 data.rows()));
    }
  }

  if (!options.contest_matrix_csv.empty()) {
    std::string csv;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (j > 0) csv.push_back(',');
        if (i == j) {
          csv.push_back('-');
        } else {
          const ContestInputs& in =
              i < j ? inputs[pair_index(i, j)] : inputs[pair_index(j, i)];
          const ContestOutcome o =
              i < j ? decide(in, margin)
                    : decide({in.mass_j, in.mass_i, in.empirical}, margin);
          csv.push_back(o == ContestOutcome::kFirstWins   ? 'W'
                        : o == ContestOutcome::kSecondWins ? 'L'
                                                           : 'D');
        }
      }
      csv.push_back('\n');
    }
    atomic_write_file(options.contest_matrix_csv, csv);
  }

  // Exponential mechanism at parameter eps/2, sensitivity 1: weights
  // exp(eps * score / 4). A single sequential draw from the stream's
  // designated sub-stream.
  RandomStream draw_rng = rng.split(1);
  result.index = exponential_mechanism_index(result.scores,
                                             budget.epsilon / 2.0, draw_rng);
  result.selected = result.canonical[result.index];
  return result;
}

}  // namespace dpmix
