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

#include "dpmix/decoders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dpmix/errors.hpp"

namespace dpmix {

namespace {

// Materialization guard for cross products; the learner's desk profile
// streams instead of materializing, so only direct decoder calls hit this.
constexpr double kMaterializeGuard = 2e6;

void check_unit_interval(double v, const char* name) {
  if (!(v > 0.0) || !(v < 1.0)) {
    throw InvalidParameterError(std::string(name) + " must lie in (0,1)");
  }
}

// The worked examples exercise gamma = 0 (clean data), so the corruption
// level lives in [0, 1).
void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !(gamma < 1.0)) {
    throw InvalidParameterError("gamma must lie in [0,1)");
  }
}

double mean_eta(double gamma) { return (1.0 - gamma) / 24.0; }
double mean_heavy_threshold(double gamma) { return (1.0 - gamma) / 8.0; }
double variance_eta(double gamma) {
  return (1.0 - gamma) * (1.0 - gamma) / 24.0;
}
double variance_heavy_threshold(double gamma) {
  return (1.0 - gamma) * (1.0 - gamma) / 8.0;
}

// max(lemma bound, threshold-clearing bound). `power` is the (1-gamma)
// exponent of the decoder in question.
std::size_t stage_bound(double beta, double gamma, const PrivacyBudget& b,
                        int power, double c) {
  const double shrink = std::pow(1.0 - gamma, power);
  const double lemma = c * std::log(2.0 / (beta * b.delta)) / (shrink * b.epsilon);
  // Keep the stability cutoff t below (1-gamma)^p / 12, half the bin mass
  // the accuracy event guarantees.
  const double clearing =
      12.0 * (1.0 + 2.0 * std::log(2.0 / b.delta) / b.epsilon) / shrink;
  return static_cast<std::size_t>(std::ceil(std::max(lemma, clearing)));
}

long grid_halfwidth(double alpha) {
  return static_cast<long>(ceil_quotient(1.0 / alpha));
}

long scale_grid_count(double alpha) {
  return static_cast<long>(ceil_quotient(1.0 / std::log2(1.0 + alpha)));
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

double coarse_mean_cap(double gamma) { return 12.0 / (1.0 - gamma); }

double coarse_scale_cap(double gamma) {
  return 12.0 / ((1.0 - gamma) * (1.0 - gamma));
}

double refined_mean_cap(double alpha, double gamma) {
  return 144.0 * (2.0 * static_cast<double>(grid_halfwidth(alpha)) + 1.0) /
         std::pow(1.0 - gamma, 3);
}

double refined_scale_cap(double alpha, double gamma) {
  return 12.0 * static_cast<double>(scale_grid_count(alpha)) /
         ((1.0 - gamma) * (1.0 - gamma));
}

double known_variance_cap(double alpha, double gamma) {
  const double a = std::min(alpha, 2.0 / 3.0);
  const double halfwidth = static_cast<double>(ceil_quotient(1.0 / (2.0 * a)));
  return coarse_mean_cap(gamma) * (2.0 * halfwidth + 1.0);
}

double identity_covariance_cap(double alpha, double gamma, std::size_t d) {
  const double dd = static_cast<double>(d);
  const double halfwidth = static_cast<double>(ceil_quotient(dd / (2.0 * alpha)));
  return std::pow(coarse_mean_cap(gamma) * (2.0 * halfwidth + 1.0), dd);
}

double multivariate_log_cap(double alpha, double gamma, std::size_t d) {
  const double dd = static_cast<double>(d);
  return dd * (std::log(refined_mean_cap(alpha / dd, gamma)) +
               std::log(refined_scale_cap(alpha / dd, gamma)));
}

HeavySelection select_heavy_bins(const HistogramEstimate& hist,
                                 double threshold, double cap) {
  HeavySelection out;
  for (const auto& [i, p] : hist.estimates) {
    if (p > threshold) out.bins.push_back({i, p});
  }
  if (static_cast<double>(out.bins.size()) > cap) {
    out.bins.clear();
    out.failed = true;
  }
  return out;
}

std::size_t mean_decoder_sample_bound(double beta, double gamma,
                                      const PrivacyBudget& budget,
                                      double sample_constant) {
  return stage_bound(beta, gamma, budget, 1, sample_constant);
}

std::size_t variance_decoder_sample_bound(double beta, double gamma,
                                          const PrivacyBudget& budget,
                                          double sample_constant) {
  return 2 * stage_bound(beta, gamma, budget, 2, sample_constant);
}

GaussianDecoderPlan univariate_gaussian_decoder_plan(double beta, double gamma,
                                                     const PrivacyBudget& budget,
                                                     double sample_constant) {
  GaussianDecoderPlan plan;
  plan.split = plan_budget_split_alg3(budget, gamma);
  plan.n1 = variance_decoder_sample_bound(beta / 2.0, gamma,
                                          plan.split.variance_budget,
                                          sample_constant);
  plan.n2 = mean_decoder_sample_bound(
      beta / 2.0, gamma, {plan.split.eps_prime, plan.split.delta_prime},
      sample_constant);
  plan.total = plan.n1 + plan.n2;
  return plan;
}

CoarseMeanList univariate_mean_decoder(double beta, double gamma,
                                       const PrivacyBudget& budget,
                                       double sigma_tilde,
                                       std::span<const double> data,
                                       RandomStream& rng) {
  check_unit_interval(beta, "beta");
  check_gamma(gamma);
  if (!(sigma_tilde > 0.0) || !std::isfinite(sigma_tilde)) {
    throw InvalidParameterError("sigma_tilde must be positive and finite");
  }
  if (data.empty()) {
    throw InvalidInputError("mean decoder requires nonempty data");
  }

  CoarseMeanList out;
  out.cap = 12.0 / (1.0 - gamma);
  out.histogram =
      stable_histogram(budget, mean_eta(gamma), beta / 2.0, data,
                       BinPartition::unit_width(sigma_tilde), rng);
  out.ledger.add(budget, "stable-histogram/mean");
  out.ledger.check_within(budget);

  const HeavySelection heavy =
      select_heavy_bins(out.histogram, mean_heavy_threshold(gamma), out.cap);
  if (heavy.failed) {
    out.failed = true;
    return out;
  }
  for (const auto& [i, p] : heavy.bins) {
    const double mu = static_cast<double>(i) * sigma_tilde;
    out.values.push_back(mu);
    out.weighted.push_back({mu, p});
  }
  return out;
}

CoarseScaleList univariate_variance_decoder(double beta, double gamma,
                                            const PrivacyBudget& budget,
                                            std::span<const double> data,
                                            RandomStream& rng) {
  check_unit_interval(beta, "beta");
  check_gamma(gamma);
  if (data.empty() || data.size() % 2 != 0) {
    throw InvalidInputError(
        "variance decoder requires a nonempty even-size dataset");
  }

  std::vector<double> pair_gaps;
  pair_gaps.reserve(data.size() / 2);
  for (std::size_t k = 0; k + 1 < data.size(); k += 2) {
    pair_gaps.push_back(std::abs(data[k + 1] - data[k]) / std::numbers::sqrt2);
  }

  CoarseScaleList out;
  out.cap = 12.0 / ((1.0 - gamma) * (1.0 - gamma));
  out.histogram = stable_histogram(budget, variance_eta(gamma), beta / 2.0,
                                   pair_gaps, BinPartition::dyadic(), rng);
  out.ledger.add(budget, "stable-histogram/variance");
  out.ledger.check_within(budget);

  const HeavySelection heavy = select_heavy_bins(
      out.histogram, variance_heavy_threshold(gamma), out.cap);
  if (heavy.failed) {
    out.failed = true;
    return out;
  }
  for (const auto& [i, p] : heavy.bins) {
    const double sigma = std::ldexp(1.0, static_cast<int>(i) + 1);
    out.values.push_back(sigma);
    out.weighted.push_back({sigma, p});
  }
  return out;
}

RefinedParameterLists univariate_gaussian_decoder(double alpha, double beta,
                                                  double gamma,
                                                  const PrivacyBudget& budget,
                                                  std::span<const double> data,
                                                  RandomStream& rng) {
  check_unit_interval(alpha, "alpha");
  check_unit_interval(beta, "beta");
  check_gamma(gamma);

  RefinedParameterLists out;
  out.mean_cap = refined_mean_cap(alpha, gamma);
  out.scale_cap = refined_scale_cap(alpha, gamma);
  out.split = plan_budget_split_alg3(budget, gamma);

  // Variance-stage allotment: the planned bound, clamped by the dataset.
  const std::size_t n1_planned = variance_decoder_sample_bound(
      beta / 2.0, gamma, out.split.variance_budget);
  if (data.size() < 2 * n1_planned) {
    throw InvalidInputError(
        "univariate decoder needs at least " + std::to_string(2 * n1_planned) +
        " samples (variance-stage allotment n1=" + std::to_string(n1_planned) +
        " would starve the mean stage); got " + std::to_string(data.size()));
  }
  const std::size_t n1 = n1_planned;
  const auto d1 = data.subspan(0, n1);
  const auto d2 = data.subspan(n1);

  RandomStream var_rng = rng.split(0);
  CoarseScaleList coarse = univariate_variance_decoder(
      beta / 2.0, gamma, out.split.variance_budget, d1, var_rng);
  out.ledger.add_subledger(coarse.ledger, "variance-stage");

  if (coarse.failed || coarse.values.empty()) {
    out.failed = true;
    out.ledger.check_within(budget);
    return out;
  }

  const PrivacyBudget per_call{out.split.eps_prime, out.split.delta_prime};
  const long halfwidth = grid_halfwidth(alpha);
  const long c_count = scale_grid_count(alpha);
  const double c_step = std::log2(1.0 + alpha);

  std::vector<double> means;
  std::vector<double> scales;
  for (std::size_t b = 0; b < coarse.values.size(); ++b) {
    const double sigma_tilde = coarse.values[b];
    RandomStream branch_rng = rng.split(b + 1);
    CoarseMeanList coarse_means = univariate_mean_decoder(
        beta / 2.0, gamma, per_call, sigma_tilde, d2, branch_rng);

    RefinedParameterLists::Branch branch;
    branch.sigma_tilde = sigma_tilde;
    branch.weight = coarse.weighted[b].second;
    branch.coarse_means = coarse_means.weighted;
    branch.mean_histogram = coarse_means.histogram;

    if (!coarse_means.failed) {
      for (double mu_tilde : coarse_means.values) {
        for (long j = -halfwidth; j <= halfwidth; ++j) {
          branch.refined_means.push_back(
              mu_tilde + static_cast<double>(j) * alpha * sigma_tilde);
        }
      }
    }
    for (long m = 1; m <= c_count; ++m) {
      const double c = static_cast<double>(m) * c_step;
      branch.refined_scales.push_back(sigma_tilde * std::exp2(c - 1.0));
    }
    means.insert(means.end(), branch.refined_means.begin(),
                 branch.refined_means.end());
    scales.insert(scales.end(), branch.refined_scales.begin(),
                  branch.refined_scales.end());
    out.branches.push_back(std::move(branch));
  }
  // All mean-decoder invocations fold into one advanced-composition group
  // with delta0 = delta/(2(T+1)), totalling at most (eps/2, delta/2).
  out.ledger.add_advanced_group(
      out.split.eps_prime,
      std::vector<double>(coarse.values.size(), out.split.delta_prime),
      budget.delta / (2.0 * (static_cast<double>(out.split.steps) + 1.0)),
      "mean-stage");
  out.ledger.check_within(budget);

  out.means = sorted_unique(std::move(means));
  out.scales = sorted_unique(std::move(scales));
  out.failed = out.means.empty() || out.scales.empty();
  return out;
}

CandidateList candidates_from_refined(const RefinedParameterLists& refined) {
  CandidateList out;
  out.cap = refined.mean_cap * refined.scale_cap;
  out.ledger = refined.ledger;
  out.failed = refined.failed;
  if (refined.failed) return out;
  const double total = static_cast<double>(refined.means.size()) *
                       static_cast<double>(refined.scales.size());
  if (total > kMaterializeGuard) {
    throw CandidateOverflowError(
        "refined cross product too large to materialize (" +
        std::to_string(total) + " candidates)");
  }
  for (double mu : refined.means) {
    for (double sigma : refined.scales) {
      out.hypotheses.push_back(Gaussian1D{mu, sigma});
    }
  }
  std::sort(out.hypotheses.begin(), out.hypotheses.end(), model_less);
  return out;
}

CandidateList known_variance_list_decoder(double alpha, double beta,
                                          double gamma,
                                          const PrivacyBudget& budget,
                                          double sigma,
                                          std::span<const double> data,
                                          RandomStream& rng) {
  if (!(sigma > 0.0)) {
    throw InvalidParameterError("known sigma must be positive");
  }
  check_unit_interval(beta, "beta");
  check_gamma(gamma);
  if (!(alpha > 0.0)) throw InvalidParameterError("alpha must be positive");
  // The TV argument only supports targets up to 2/3.
  const double a = std::min(alpha, 2.0 / 3.0);

  CoarseMeanList coarse =
      univariate_mean_decoder(beta, gamma, budget, sigma, data, rng);
  const long halfwidth = static_cast<long>(ceil_quotient(1.0 / (2.0 * a)));

  CandidateList out;
  out.cap = (12.0 / (1.0 - gamma)) * (2.0 * static_cast<double>(halfwidth) + 1.0);
  out.ledger = coarse.ledger;
  out.failed = coarse.failed;
  if (coarse.failed) return out;

  std::vector<double> mus;
  for (double mu_tilde : coarse.values) {
    for (long j = -halfwidth; j <= halfwidth; ++j) {
      mus.push_back(mu_tilde + 2.0 * static_cast<double>(j) * a * sigma);
    }
  }
  for (double mu : sorted_unique(std::move(mus))) {
    out.hypotheses.push_back(Gaussian1D{mu, sigma});
  }
  return out;
}

CandidateList full_univariate_list_decoder(double alpha, double beta,
                                           double gamma,
                                           const PrivacyBudget& budget,
                                           std::span<const double> data,
                                           RandomStream& rng) {
  return candidates_from_refined(
      univariate_gaussian_decoder(alpha, beta, gamma, budget, data, rng));
}

MultivariateDecodeResult multivariate_decode_detail(double alpha, double beta,
                                                    double gamma,
                                                    const PrivacyBudget& budget,
                                                    const Dataset& data,
                                                    RandomStream& rng) {
  const std::size_t d = data.dim;
  if (d == 0 || data.rows() == 0) {
    throw InvalidInputError("multivariate decoder requires nonempty data");
  }
  const double dd = static_cast<double>(d);
  MultivariateDecodeResult out;
  const double per_mean = refined_mean_cap(alpha / dd, gamma);
  const double per_scale = refined_scale_cap(alpha / dd, gamma);
  out.cap = std::pow(per_mean * per_scale, dd);

  for (std::size_t i = 0; i < d; ++i) {
    RandomStream coord_rng = rng.split(i);
    const std::vector<double> column = data.column(i);
    out.coordinates.push_back(univariate_gaussian_decoder(
        alpha / dd, beta / dd, gamma, budget.scaled(1.0 / dd), column,
        coord_rng));
    out.ledger.add_subledger(out.coordinates.back().ledger,
                             "coordinate-" + std::to_string(i));
    // One coordinate failing voids the union-bound argument for the rest.
    if (out.coordinates.back().failed) out.failed = true;
  }
  out.ledger.check_within(budget);
  return out;
}

CandidateList multivariate_gaussian_decoder(double alpha, double beta,
                                            double gamma,
                                            const PrivacyBudget& budget,
                                            const Dataset& data,
                                            RandomStream& rng) {
  MultivariateDecodeResult detail =
      multivariate_decode_detail(alpha, beta, gamma, budget, data, rng);
  CandidateList out;
  out.cap = detail.cap;
  out.ledger = detail.ledger;
  out.failed = detail.failed;
  if (detail.failed) return out;

  const std::size_t d = detail.coordinates.size();
  double mean_vectors = 1.0, scale_vectors = 1.0;
  for (const auto& c : detail.coordinates) {
    mean_vectors *= static_cast<double>(c.means.size());
    scale_vectors *= static_cast<double>(c.scales.size());
  }
  if (mean_vectors * scale_vectors > kMaterializeGuard) {
    throw CandidateOverflowError(
        "multivariate cross product too large to materialize (" +
        std::to_string(mean_vectors * scale_vectors) + " candidates)");
  }

  // Odometer over the d-fold products of means and scales.
  std::vector<std::vector<double>> mean_axes, scale_axes;
  for (const auto& c : detail.coordinates) {
    mean_axes.push_back(c.means);
    scale_axes.push_back(c.scales);
  }
  auto enumerate = [d](const std::vector<std::vector<double>>& axes,
                       auto&& emit) {
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      emit(idx);
      std::size_t j = 0;
      while (j < d && ++idx[j] == axes[j].size()) idx[j++] = 0;
      if (j == d) break;
    }
  };
  std::vector<std::vector<double>> mus, sigmas;
  enumerate(mean_axes, [&](const std::vector<std::size_t>& idx) {
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = mean_axes[j][idx[j]];
    mus.push_back(std::move(v));
  });
  enumerate(scale_axes, [&](const std::vector<std::size_t>& idx) {
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = scale_axes[j][idx[j]];
    sigmas.push_back(std::move(v));
  });
  for (const auto& mu : mus) {
    for (const auto& sg : sigmas) {
      if (d == 1) {
        out.hypotheses.push_back(Gaussian1D{mu[0], sg[0]});
      } else {
        out.hypotheses.push_back(AxisAlignedGaussian{mu, sg});
      }
    }
  }
  std::sort(out.hypotheses.begin(), out.hypotheses.end(), model_less);
  return out;
}

IdentityDecodeResult identity_decode_detail(double alpha, double beta,
                                            double gamma,
                                            const PrivacyBudget& budget,
                                            const Dataset& data,
                                            RandomStream& rng) {
  const std::size_t d = data.dim;
  if (d == 0 || data.rows() == 0) {
    throw InvalidInputError("identity decoder requires nonempty data");
  }
  if (!(alpha > 0.0)) throw InvalidParameterError("alpha must be positive");
  const double dd = static_cast<double>(d);
  const long halfwidth = static_cast<long>(ceil_quotient(dd / (2.0 * alpha)));

  IdentityDecodeResult out;
  out.cap = std::pow(
      (12.0 / (1.0 - gamma)) * (2.0 * static_cast<double>(halfwidth) + 1.0),
      dd);
  for (std::size_t i = 0; i < d; ++i) {
    RandomStream coord_rng = rng.split(i);
    const std::vector<double> column = data.column(i);
    out.coordinates.push_back(univariate_mean_decoder(
        beta / dd, gamma, budget.scaled(1.0 / dd), 1.0, column, coord_rng));
    out.ledger.add_subledger(out.coordinates.back().ledger,
                             "coordinate-" + std::to_string(i));
    if (out.coordinates.back().failed) out.failed = true;

    std::vector<double> net;
    for (double mu_tilde : out.coordinates.back().values) {
      for (long j = -halfwidth; j <= halfwidth; ++j) {
        net.push_back(mu_tilde + 2.0 * static_cast<double>(j) * alpha / dd);
      }
    }
    out.refined_means.push_back(sorted_unique(std::move(net)));
  }
  out.ledger.check_within(budget);
  return out;
}

CandidateList identity_covariance_list_decoder(double alpha, double beta,
                                               double gamma,
                                               const PrivacyBudget& budget,
                                               const Dataset& data,
                                               RandomStream& rng) {
  IdentityDecodeResult detail =
      identity_decode_detail(alpha, beta, gamma, budget, data, rng);
  CandidateList out;
  out.cap = detail.cap;
  out.ledger = detail.ledger;
  out.failed = detail.failed;
  if (detail.failed) return out;

  const std::size_t d = detail.refined_means.size();
  double total = 1.0;
  for (const auto& net : detail.refined_means) {
    total *= static_cast<double>(net.size());
  }
  if (total > kMaterializeGuard) {
    throw CandidateOverflowError(
        "identity-covariance cross product too large to materialize (" +
        std::to_string(total) + " candidates)");
  }
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    if (d == 1) {
      out.hypotheses.push_back(Gaussian1D{detail.refined_means[0][idx[0]], 1.0});
    } else {
      std::vector<double> mu(d);
      for (std::size_t j = 0; j < d; ++j) mu[j] = detail.refined_means[j][idx[j]];
      out.hypotheses.push_back(
          AxisAlignedGaussian{mu, std::vector<double>(d, 1.0)});
    }
    std::size_t j = 0;
    while (j < d && ++idx[j] == detail.refined_means[j].size()) idx[j++] = 0;
    if (j == d) break;
  }
  std::sort(out.hypotheses.begin(), out.hypotheses.end(), model_less);
  return out;
}

namespace {

nlohmann::json spent_json(const BudgetLedger& ledger) {
  const PrivacyBudget total = ledger.total();
  return {{"epsilon", total.epsilon}, {"delta", total.delta}};
}

}  // namespace

nlohmann::json decoder_result_to_json(const RefinedParameterLists& r) {
  return {{"means", r.means},
          {"scales", r.scales},
          {"failed", r.failed},
          {"budget_spent", spent_json(r.ledger)}};
}

nlohmann::json decoder_result_to_json(const CoarseMeanList& r) {
  return {{"means", r.values},
          {"scales", nlohmann::json::array()},
          {"failed", r.failed},
          {"budget_spent", spent_json(r.ledger)}};
}

nlohmann::json decoder_result_to_json(const CoarseScaleList& r) {
  return {{"means", nlohmann::json::array()},
          {"scales", r.values},
          {"failed", r.failed},
          {"budget_spent", spent_json(r.ledger)}};
}

}  // namespace dpmix
