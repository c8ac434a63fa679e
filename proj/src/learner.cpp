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

#include "dpmix/learner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "dpmix/errors.hpp"
#include "dpmix/parallel.hpp"
#include "dpmix/tv.hpp"

namespace dpmix {

namespace {

// Desk-profile constants. The faithful reduction's decoder parameters
// (alpha/18 grids, corruption 1 - alpha/18k) force candidate sets beyond any
// workable selection pool, so the desk profile decodes at the caller's
// accuracy with a fixed 1/2 declared corruption, prunes by the released
// histogram estimates, and preselects the mixtures that best explain those
// estimates before running the private tournament. Privacy is unaffected:
// every pruning input is a released DP output.
constexpr double kDeskGamma = 0.5;
constexpr std::size_t kDeskSurvivors1d = 384;
constexpr std::size_t kDeskSurvivorsNd = 96;
constexpr std::size_t kDeskComponentLimit = 4096;
constexpr std::size_t kDeskEvidencePerBranch = 8;
constexpr double kStreamGuard = 5e7;
constexpr double kMaterializeGuard = 2e6;

struct ReductionParams {
  double alpha_dec = 0.0;
  double beta_dec = 0.0;
  double gamma_dec = 0.0;
  PrivacyBudget decoder_budget;
  long long net_r = 1;
  bool desk = false;
};

ReductionParams reduction_params(const LearnerConfig& c) {
  ReductionParams p;
  p.beta_dec = c.beta / (2.0 * c.k);
  p.decoder_budget = {c.budget.epsilon / 2.0, c.budget.delta};
  p.desk = c.dedup_radius > 0.0;
  if (p.desk) {
    p.alpha_dec = std::min(c.alpha, 2.0 / 3.0);
    p.gamma_dec = kDeskGamma;
    p.net_r = ceil_quotient(2.0 * static_cast<double>(c.k) / c.alpha);
  } else {
    p.alpha_dec = c.alpha / 18.0;
    p.gamma_dec = 1.0 - c.alpha / (18.0 * static_cast<double>(c.k));
    p.net_r = ceil_quotient(18.0 * static_cast<double>(c.k) / c.alpha);
  }
  return p;
}

double family_log_cap(const LearnerConfig& c, MixtureFamily family,
                      const ReductionParams& p) {
  switch (family) {
    case MixtureFamily::kUnivariate:
      return std::log(refined_mean_cap(p.alpha_dec, p.gamma_dec)) +
             std::log(refined_scale_cap(p.alpha_dec, p.gamma_dec));
    case MixtureFamily::kKnownSigma:
      return std::log(known_variance_cap(p.alpha_dec, p.gamma_dec));
    case MixtureFamily::kIdentityCovariance:
      return std::log(identity_covariance_cap(p.alpha_dec, p.gamma_dec, c.d));
    case MixtureFamily::kAxisAligned:
      return multivariate_log_cap(p.alpha_dec, p.gamma_dec, c.d);
  }
  return 0.0;
}

}  // namespace

std::vector<double> SimplexNet::weights(std::size_t idx) const {
  std::vector<double> w(points[idx].size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<double>(points[idx][i]) / static_cast<double>(r);
  }
  return w;
}

double simplex_net_size_bound(int k, long long r) {
  // C(r+k-1, k-1), iteratively.
  double out = 1.0;
  for (int i = 1; i <= k - 1; ++i) {
    out *= static_cast<double>(r + k - i);
    out /= static_cast<double>(i);
  }
  return out;
}

SimplexNet simplex_net(int k, double alpha, double size_cap) {
  if (k < 1) throw InvalidParameterError("simplex net requires k >= 1");
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw InvalidParameterError("net alpha must lie in (0,1]");
  }
  SimplexNet net;
  net.k = k;
  net.alpha = alpha;
  net.r = ceil_quotient(1.0 / alpha);

  const double size = simplex_net_size_bound(k, net.r);
  if (size > size_cap) {
    throw CandidateOverflowError(
        "simplex net of size " + std::to_string(size) +
        " exceeds the configured cap " + std::to_string(size_cap));
  }

  // Enumerate {t : ||t||_1 = r} in lexicographic order.
  std::vector<long long> t(static_cast<std::size_t>(k), 0);
  const auto emit = [&net, &t] { net.points.push_back(t); };
  // Odometer over the first k-1 coordinates; the last absorbs the remainder.
  std::function<void(int, long long)> rec = [&](int pos, long long left) {
    if (pos == k - 1) {
      t[static_cast<std::size_t>(pos)] = left;
      emit();
      return;
    }
    for (long long v = 0; v <= left; ++v) {
      t[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, net.r);
  return net;
}

std::vector<long long> simplex_net_round(std::span<const double> x,
                                         long long r) {
  const std::size_t k = x.size();
  std::vector<long long> floors(k);
  double frac_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double rx = static_cast<double>(r) * x[i];
    floors[i] = static_cast<long long>(std::floor(rx));
    frac_sum += rx - std::floor(rx);
  }
  const long long ell = static_cast<long long>(std::llround(frac_sum));
  std::vector<long long> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = floors[i] + (static_cast<long long>(i) < ell ? 1 : 0);
  }
  return out;
}

namespace {

double component_tv_bound(const Component& a, const Component& b) {
  if (a.index() != b.index()) return 2.0;  // treated as unmergeable
  if (const auto* ga = std::get_if<Gaussian1D>(&a)) {
    return tv_univariate_gaussians(*ga, std::get<Gaussian1D>(b));
  }
  if (const auto* aa = std::get_if<AxisAlignedGaussian>(&a)) {
    const auto& ab = std::get<AxisAlignedGaussian>(b);
    if (aa->mu.size() != ab.mu.size()) return 2.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < aa->mu.size(); ++j) {
      acc += tv_univariate_gaussians({aa->mu[j], aa->sigma[j]},
                                     {ab.mu[j], ab.sigma[j]});
    }
    return std::min(1.0, acc);
  }
  const auto& pa = std::get<PointMass>(a);
  const auto& pb = std::get<PointMass>(b);
  return pa.location == pb.location ? 0.0 : 1.0;
}

Mixture canonical_mixture(std::vector<Component> comps,
                          std::vector<double> weights) {
  std::vector<std::size_t> order(comps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Model ma = component_to_model(comps[a]);
    const Model mb = component_to_model(comps[b]);
    if (model_less(ma, mb)) return true;
    if (model_less(mb, ma)) return false;
    return weights[a] < weights[b];
  });
  Mixture out;
  for (std::size_t i : order) {
    out.components.push_back(comps[i]);
    out.weights.push_back(weights[i]);
  }
  return out;
}

Component model_to_component(const Model& m) {
  if (const auto* g = std::get_if<Gaussian1D>(&m)) return *g;
  if (const auto* a = std::get_if<AxisAlignedGaussian>(&m)) return *a;
  if (const auto* p = std::get_if<PointMass>(&m)) return *p;
  throw InvalidInputError("mixture candidates must be component models");
}

}  // namespace

double mixture_distance_bound(const Mixture& a, const Mixture& b) {
  if (a.components.size() != b.components.size()) return 2.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    acc += 0.5 * std::abs(a.weights[i] - b.weights[i]);
    acc += std::max(a.weights[i], b.weights[i]) *
           component_tv_bound(a.components[i], b.components[i]);
  }
  return acc;
}

CandidateMixtureSet build_candidate_mixtures(
    const std::vector<Model>& candidates, const SimplexNet& net, double cap,
    double dedup_radius) {
  if (candidates.empty()) {
    throw InvalidInputError("candidate list must be nonempty");
  }
  if (net.size() == 0) throw InvalidInputError("net must be nonempty");
  if (cap < 1.0) throw InvalidParameterError("candidate cap must be >= 1");

  const std::size_t k = static_cast<std::size_t>(net.k);
  const double m = static_cast<double>(candidates.size());
  CandidateMixtureSet out;
  out.bound = std::pow(m, static_cast<double>(k)) *
              static_cast<double>(net.size());
  out.enumerated = out.bound;

  if (dedup_radius <= 0.0 && out.bound > cap) {
    throw CandidateOverflowError(
        "candidate mixture product " + std::to_string(out.bound) +
        " exceeds cap " + std::to_string(cap) +
        "; increase alpha or enable dedup");
  }
  if (out.bound > kMaterializeGuard) {
    throw CandidateOverflowError(
        "candidate mixture product " + std::to_string(out.bound) +
        " exceeds the materialization guard; increase alpha");
  }

  std::vector<Component> comps(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    comps[i] = model_to_component(candidates[i]);
  }

  // Recent-window dedup: enumeration emits parameter-adjacent mixtures next
  // to each other, so a bounded window catches the near-duplicates that
  // matter. Merging never drops coverage, only redundancy.
  const std::size_t window = 256;

  std::vector<std::size_t> idx(k, 0);
  std::vector<Component> tuple(k);
  while (true) {
    for (std::size_t j = 0; j < k; ++j) tuple[j] = comps[idx[j]];
    for (std::size_t w = 0; w < net.size(); ++w) {
      Mixture mix = canonical_mixture(tuple, net.weights(w));
      bool merged = false;
      if (dedup_radius > 0.0) {
        const std::size_t start =
            out.mixtures.size() > window ? out.mixtures.size() - window : 0;
        for (std::size_t i = start; i < out.mixtures.size(); ++i) {
          if (mixture_distance_bound(out.mixtures[i], mix) < dedup_radius) {
            merged = true;
            break;
          }
        }
      }
      if (!merged) {
        out.mixtures.push_back(std::move(mix));
        if (static_cast<double>(out.mixtures.size()) > cap) {
          throw CandidateOverflowError(
              "retained candidate mixtures exceed cap " + std::to_string(cap) +
              "; increase alpha or the dedup radius");
        }
      }
    }
    std::size_t j = 0;
    while (j < k && ++idx[j] == comps.size()) idx[j++] = 0;
    if (j == k) break;
  }
  return out;
}

MixtureFamily family_from_string(const std::string& name) {
  if (name == "univariate") return MixtureFamily::kUnivariate;
  if (name == "axis-aligned" || name == "axis-aligned-d") {
    return MixtureFamily::kAxisAligned;
  }
  if (name == "identity-cov" || name == "identity-cov-d") {
    return MixtureFamily::kIdentityCovariance;
  }
  if (name == "known-sigma") return MixtureFamily::kKnownSigma;
  throw InvalidParameterError("unknown family: " + name);
}

std::string family_to_string(MixtureFamily family) {
  switch (family) {
    case MixtureFamily::kUnivariate: return "univariate";
    case MixtureFamily::kAxisAligned: return "axis-aligned";
    case MixtureFamily::kIdentityCovariance: return "identity-cov";
    case MixtureFamily::kKnownSigma: return "known-sigma";
  }
  return "unknown";
}

void validate(const LearnerConfig& config) {
  if (config.k < 1) throw InvalidParameterError("k must be >= 1");
  if (!(config.alpha > 0.0) || !(config.alpha < 1.0)) {
    throw InvalidParameterError("alpha must lie in (0,1)");
  }
  if (!(config.beta > 0.0) || !(config.beta < 1.0)) {
    throw InvalidParameterError("beta must lie in (0,1)");
  }
  if (!(config.budget.epsilon > 0.0) || !(config.budget.delta > 0.0)) {
    throw InvalidParameterError("learner requires epsilon > 0 and delta > 0");
  }
  if (config.candidate_cap < 1.0) {
    throw InvalidParameterError("candidate cap must be >= 1");
  }
  if (config.dedup_radius < 0.0 ||
      (config.dedup_radius > 0.0 && config.dedup_radius >= config.alpha / 36.0)) {
    throw InvalidParameterError(
        "dedup radius must be 0 (disabled) or < alpha/36");
  }
  if (config.d < 1) throw InvalidParameterError("d must be >= 1");
  if (!(config.known_sigma > 0.0)) {
    throw InvalidParameterError("known sigma must be positive");
  }
}

SampleSizePlan sample_size_plan(const LearnerConfig& config,
                                MixtureFamily family) {
  validate(config);
  const ReductionParams p = reduction_params(config);
  const double dd = static_cast<double>(config.d);
  SampleSizePlan plan;
  switch (family) {
    case MixtureFamily::kUnivariate:
      plan.n1 = univariate_gaussian_decoder_plan(p.beta_dec, p.gamma_dec,
                                                 p.decoder_budget,
                                                 config.sample_constant)
                    .total;
      break;
    case MixtureFamily::kKnownSigma:
      plan.n1 = mean_decoder_sample_bound(p.beta_dec, p.gamma_dec,
                                          p.decoder_budget,
                                          config.sample_constant);
      break;
    case MixtureFamily::kIdentityCovariance:
      plan.n1 = mean_decoder_sample_bound(p.beta_dec / dd, p.gamma_dec,
                                          p.decoder_budget.scaled(1.0 / dd),
                                          config.sample_constant);
      break;
    case MixtureFamily::kAxisAligned:
      plan.n1 = univariate_gaussian_decoder_plan(
                    p.beta_dec / dd, p.gamma_dec,
                    p.decoder_budget.scaled(1.0 / dd), config.sample_constant)
                    .total;
      break;
  }
  const double log_cap = family_log_cap(config, family, p);
  const double kk = static_cast<double>(config.k);
  const double term =
      kk * (log_cap + std::log(kk / config.alpha)) + std::log(1.0 / config.beta);
  plan.n2 = static_cast<std::size_t>(std::ceil(
      config.sample_constant * term *
      (1.0 / (config.alpha * config.alpha) +
       1.0 / (config.alpha * config.budget.epsilon))));
  plan.total = plan.n1 + plan.n2;
  return plan;
}

namespace {

// ---- Desk profile ----------------------------------------------------------

struct EvidenceBin {
  std::size_t coord = 0;
  double lo = 0.0;
  double hi = 0.0;
  double weight = 0.0;  // released estimate
};

struct DeskComponents {
  std::vector<Component> components;
  std::vector<EvidenceBin> evidence;
  BudgetLedger ledger;
  double decoder_cap = 0.0;
  bool failed = false;
};

void add_branch_evidence(std::vector<EvidenceBin>& evidence, std::size_t coord,
                         const HistogramEstimate& hist, double width) {
  std::vector<std::pair<double, std::int64_t>> ranked;
  for (const auto& [i, p] : hist.estimates) ranked.push_back({p, i});
  std::sort(ranked.rbegin(), ranked.rend());
  const std::size_t keep = std::min(ranked.size(), kDeskEvidencePerBranch);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto [p, bin] = ranked[i];
    const auto [lo, hi] = BinPartition::unit_width(width).bounds(bin);
    evidence.push_back({coord, lo, hi, p});
  }
}

// Per-branch pairing of refined means and scales, with coarse means pruned
// to the heaviest few. All inputs are released histogram estimates.
std::vector<Gaussian1D> desk_branch_components(
    const RefinedParameterLists& refined, int k, double alpha_dec,
    std::vector<EvidenceBin>* evidence, std::size_t coord) {
  const std::size_t means_per_branch = 2 * static_cast<std::size_t>(k) + 2;
  const long halfwidth = static_cast<long>(ceil_quotient(1.0 / alpha_dec));
  std::vector<Gaussian1D> out;
  for (const auto& branch : refined.branches) {
    if (branch.coarse_means.empty()) continue;
    auto ranked = branch.coarse_means;
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(std::min(ranked.size(), means_per_branch));
    for (const auto& [mu_tilde, est] : ranked) {
      for (long j = -halfwidth; j <= halfwidth; ++j) {
        const double mu =
            mu_tilde + static_cast<double>(j) * alpha_dec * branch.sigma_tilde;
        for (double sigma : branch.refined_scales) out.push_back({mu, sigma});
      }
    }
    if (evidence != nullptr) {
      add_branch_evidence(*evidence, coord, branch.mean_histogram,
                          branch.sigma_tilde);
    }
  }
  std::sort(out.begin(), out.end(), [](const Gaussian1D& a, const Gaussian1D& b) {
    return std::pair{a.mu, a.sigma} < std::pair{b.mu, b.sigma};
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Gaussian1D& a, const Gaussian1D& b) {
                          return a.mu == b.mu && a.sigma == b.sigma;
                        }),
            out.end());
  return out;
}

DeskComponents desk_decode(const LearnerConfig& config, MixtureFamily family,
                           const ReductionParams& p, const Dataset& d1,
                           RandomStream& rng) {
  DeskComponents out;
  const double dd = static_cast<double>(config.d);
  switch (family) {
    case MixtureFamily::kUnivariate: {
      const auto refined = univariate_gaussian_decoder(
          p.alpha_dec, p.beta_dec, p.gamma_dec, p.decoder_budget,
          std::span<const double>(d1.values), rng);
      out.ledger.add_subledger(refined.ledger, "list-decoder");
      out.decoder_cap = refined.mean_cap * refined.scale_cap;
      out.failed = refined.failed;
      if (refined.failed) return out;
      for (const auto& g : desk_branch_components(refined, config.k,
                                                  p.alpha_dec, &out.evidence,
                                                  0)) {
        out.components.push_back(g);
      }
      break;
    }
    case MixtureFamily::kKnownSigma: {
      const double a = std::min(p.alpha_dec, 2.0 / 3.0);
      auto coarse = univariate_mean_decoder(
          p.beta_dec, p.gamma_dec, p.decoder_budget, config.known_sigma,
          std::span<const double>(d1.values), rng);
      out.ledger.add_subledger(coarse.ledger, "list-decoder");
      out.decoder_cap = known_variance_cap(p.alpha_dec, p.gamma_dec);
      out.failed = coarse.failed || coarse.values.empty();
      if (out.failed) return out;
      const long halfwidth =
          static_cast<long>(ceil_quotient(1.0 / (2.0 * a)));
      for (double mu_tilde : coarse.values) {
        for (long j = -halfwidth; j <= halfwidth; ++j) {
          out.components.push_back(Gaussian1D{
              mu_tilde + 2.0 * static_cast<double>(j) * a * config.known_sigma,
              config.known_sigma});
        }
      }
      add_branch_evidence(out.evidence, 0, coarse.histogram,
                          config.known_sigma);
      break;
    }
    case MixtureFamily::kIdentityCovariance: {
      const auto detail = identity_decode_detail(
          p.alpha_dec, p.beta_dec, p.gamma_dec, p.decoder_budget, d1, rng);
      out.ledger.add_subledger(detail.ledger, "list-decoder");
      out.decoder_cap = detail.cap;
      out.failed = detail.failed;
      if (detail.failed) return out;
      // Per-coordinate nets, pruned to the heaviest coarse means.
      std::vector<std::vector<double>> axes;
      const long halfwidth =
          static_cast<long>(ceil_quotient(dd / (2.0 * p.alpha_dec)));
      for (std::size_t i = 0; i < detail.coordinates.size(); ++i) {
        auto ranked = detail.coordinates[i].weighted;
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
          return a.second > b.second;
        });
        ranked.resize(std::min<std::size_t>(ranked.size(), 2 * config.k + 2));
        std::vector<double> axis;
        for (const auto& [mu_tilde, est] : ranked) {
          for (long j = -halfwidth; j <= halfwidth; ++j) {
            axis.push_back(mu_tilde +
                           2.0 * static_cast<double>(j) * p.alpha_dec / dd);
          }
        }
        std::sort(axis.begin(), axis.end());
        axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
        axes.push_back(std::move(axis));
        add_branch_evidence(out.evidence, i, detail.coordinates[i].histogram,
                            1.0);
      }
      double total = 1.0;
      for (const auto& axis : axes) total *= static_cast<double>(axis.size());
      if (total > static_cast<double>(kDeskComponentLimit)) {
        throw CandidateOverflowError(
            "desk identity component grid too large; increase alpha");
      }
      std::vector<std::size_t> idx(axes.size(), 0);
      while (true) {
        std::vector<double> mu(axes.size());
        for (std::size_t j = 0; j < axes.size(); ++j) mu[j] = axes[j][idx[j]];
        if (axes.size() == 1) {
          out.components.push_back(Gaussian1D{mu[0], 1.0});
        } else {
          out.components.push_back(
              AxisAlignedGaussian{mu, std::vector<double>(axes.size(), 1.0)});
        }
        std::size_t j = 0;
        while (j < axes.size() && ++idx[j] == axes[j].size()) idx[j++] = 0;
        if (j == axes.size()) break;
      }
      break;
    }
    case MixtureFamily::kAxisAligned: {
      const auto detail = multivariate_decode_detail(
          p.alpha_dec, p.beta_dec, p.gamma_dec, p.decoder_budget, d1, rng);
      out.ledger.add_subledger(detail.ledger, "list-decoder");
      out.decoder_cap =
          std::exp(multivariate_log_cap(p.alpha_dec, p.gamma_dec, config.d));
      out.failed = detail.failed;
      if (detail.failed) return out;
      // Per-coordinate (mu, sigma) pairs, pruned per branch, then crossed.
      std::vector<std::vector<Gaussian1D>> axes;
      const double per_axis_budget = std::pow(
          static_cast<double>(kDeskComponentLimit), 1.0 / dd);
      for (std::size_t i = 0; i < detail.coordinates.size(); ++i) {
        auto pairs = desk_branch_components(detail.coordinates[i], config.k,
                                            p.alpha_dec / dd, &out.evidence, i);
        if (static_cast<double>(pairs.size()) > per_axis_budget) {
          pairs.resize(static_cast<std::size_t>(per_axis_budget));
        }
        axes.push_back(std::move(pairs));
      }
      std::vector<std::size_t> idx(axes.size(), 0);
      while (true) {
        std::vector<double> mu(axes.size()), sigma(axes.size());
        for (std::size_t j = 0; j < axes.size(); ++j) {
          mu[j] = axes[j][idx[j]].mu;
          sigma[j] = axes[j][idx[j]].sigma;
        }
        if (axes.size() == 1) {
          out.components.push_back(Gaussian1D{mu[0], sigma[0]});
        } else {
          out.components.push_back(AxisAlignedGaussian{mu, sigma});
        }
        std::size_t j = 0;
        while (j < axes.size() && ++idx[j] == axes[j].size()) idx[j++] = 0;
        if (j == axes.size()) break;
      }
      break;
    }
  }
  out.failed = out.failed || out.components.empty();
  return out;
}

// Mass a component assigns to an evidence bin (its coordinate marginal).
double component_bin_mass(const Component& c, const EvidenceBin& bin) {
  double mu = 0.0, sigma = 1.0;
  if (const auto* g = std::get_if<Gaussian1D>(&c)) {
    mu = g->mu;
    sigma = g->sigma;
  } else if (const auto* a = std::get_if<AxisAlignedGaussian>(&c)) {
    mu = a->mu[bin.coord];
    sigma = a->sigma[bin.coord];
  } else {
    const auto& p = std::get<PointMass>(c);
    const double loc = p.location[bin.coord];
    return (loc > bin.lo && loc <= bin.hi) ? 1.0 : 0.0;
  }
  return std_normal_cdf((bin.hi - mu) / sigma) -
         std_normal_cdf((bin.lo - mu) / sigma);
}

struct ScoredTuple {
  double score = 0.0;
  std::vector<std::size_t> comp_idx;
  std::size_t net_idx = 0;
};

// Streams the full |components|^k x |net| product, scoring each mixture by
// the L1 gap between its predicted bin masses and the released estimates,
// and keeps the best `survivors`.
std::vector<Mixture> desk_preselect(const DeskComponents& desk,
                                    const SimplexNet& net,
                                    const LearnerConfig& config,
                                    std::size_t survivors,
                                    double* enumerated) {
  const std::size_t k = static_cast<std::size_t>(config.k);
  const std::size_t m = desk.components.size();
  const std::size_t bins = desk.evidence.size();
  const double conceptual =
      std::pow(static_cast<double>(m), static_cast<double>(k)) *
      static_cast<double>(net.size());
  *enumerated = conceptual;
  if (conceptual > kStreamGuard) {
    throw CandidateOverflowError(
        "desk candidate stream of " + std::to_string(conceptual) +
        " mixtures exceeds the guard; increase alpha");
  }

  // Component-by-bin mass table.
  std::vector<double> table(m * bins);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t b = 0; b < bins; ++b) {
      table[i * bins + b] = component_bin_mass(desk.components[i],
                                               desk.evidence[b]);
    }
  }
  std::vector<std::vector<double>> net_weights;
  for (std::size_t w = 0; w < net.size(); ++w) {
    net_weights.push_back(net.weights(w));
  }

  // Parallel over the first tuple slot; each task keeps its own top list.
  std::vector<std::vector<ScoredTuple>> per_task(m);
  parallel_for(m, [&](std::size_t first) {
    std::vector<ScoredTuple>& best = per_task[first];
    std::vector<std::size_t> idx(k, 0);
    idx[0] = first;
    std::vector<double> pred(bins);
    // Odometer over slots 1..k-1.
    while (true) {
      for (const auto& w : net_weights) {
        std::fill(pred.begin(), pred.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
          const double wj = w[j];
          if (wj == 0.0) continue;
          const double* row = &table[idx[j] * bins];
          for (std::size_t b = 0; b < bins; ++b) pred[b] += wj * row[b];
        }
        double s = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
          s += std::abs(desk.evidence[b].weight - pred[b]);
        }
        if (best.size() < survivors || s < best.back().score) {
          ScoredTuple st;
          st.score = s;
          st.comp_idx = idx;
          st.net_idx = static_cast<std::size_t>(&w - net_weights.data());
          best.insert(std::upper_bound(best.begin(), best.end(), st,
                                       [](const ScoredTuple& a,
                                          const ScoredTuple& b) {
                                         return a.score < b.score;
                                       }),
                      std::move(st));
          if (best.size() > survivors) best.pop_back();
        }
      }
      if (k == 1) break;
      std::size_t j = 1;
      while (j < k && ++idx[j] == m) idx[j++] = 0;
      if (j == k) break;
    }
  });

  // Deterministic merge across tasks.
  std::vector<ScoredTuple> all;
  for (auto& v : per_task) {
    all.insert(all.end(), std::make_move_iterator(v.begin()),
               std::make_move_iterator(v.end()));
  }
  std::sort(all.begin(), all.end(), [](const ScoredTuple& a,
                                       const ScoredTuple& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.comp_idx != b.comp_idx) return a.comp_idx < b.comp_idx;
    return a.net_idx < b.net_idx;
  });
  if (all.size() > survivors) all.resize(survivors);

  std::vector<Mixture> out;
  std::vector<Component> tuple(k);
  for (const auto& st : all) {
    for (std::size_t j = 0; j < k; ++j) tuple[j] = desk.components[st.comp_idx[j]];
    Mixture mix = canonical_mixture(tuple, net_weights[st.net_idx]);
    bool merged = false;
    for (const auto& kept : out) {
      if (mixture_distance_bound(kept, mix) < config.dedup_radius) {
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(std::move(mix));
  }
  if (static_cast<double>(out.size()) > config.candidate_cap) {
    out.resize(static_cast<std::size_t>(config.candidate_cap));
  }
  return out;
}

CandidateList faithful_decode(const LearnerConfig& config,
                              MixtureFamily family, const ReductionParams& p,
                              const Dataset& d1, RandomStream& rng) {
  switch (family) {
    case MixtureFamily::kUnivariate:
      return full_univariate_list_decoder(p.alpha_dec, p.beta_dec, p.gamma_dec,
                                          p.decoder_budget,
                                          std::span<const double>(d1.values),
                                          rng);
    case MixtureFamily::kKnownSigma:
      return known_variance_list_decoder(p.alpha_dec, p.beta_dec, p.gamma_dec,
                                         p.decoder_budget, config.known_sigma,
                                         std::span<const double>(d1.values),
                                         rng);
    case MixtureFamily::kIdentityCovariance:
      return identity_covariance_list_decoder(p.alpha_dec, p.beta_dec,
                                              p.gamma_dec, p.decoder_budget,
                                              d1, rng);
    case MixtureFamily::kAxisAligned:
      return multivariate_gaussian_decoder(p.alpha_dec, p.beta_dec,
                                           p.gamma_dec, p.decoder_budget, d1,
                                           rng);
  }
  throw InvalidParameterError("unknown family");
}

}  // namespace

LearnResult learn_mixture(const LearnerConfig& config, MixtureFamily family,
                          const Dataset& data, bool force) {
  validate(config);
  const bool needs_d = family == MixtureFamily::kAxisAligned ||
                       family == MixtureFamily::kIdentityCovariance;
  if (needs_d && data.dim != config.d) {
    throw InvalidInputError("dataset dimension does not match config.d");
  }
  if (!needs_d && data.dim != 1) {
    throw InvalidInputError("univariate families require 1-d data");
  }
  validate_entry_budget(config.budget, data.rows());

  const ReductionParams p = reduction_params(config);
  const SampleSizePlan plan = sample_size_plan(config, family);
  if (!force && data.rows() < plan.total) {
    throw PlanError("dataset has " + std::to_string(data.rows()) +
                    " rows but the sample-size plan requires " +
                    std::to_string(plan.total) + " (n1=" +
                    std::to_string(plan.n1) + ", n2=" +
                    std::to_string(plan.n2) + "); pass force to override");
  }
  const std::size_t n1 = std::min<std::size_t>(plan.n1, data.rows() - 1);

  Dataset d1, d2;
  d1.dim = d2.dim = data.dim;
  d1.values.assign(data.values.begin(),
                   data.values.begin() + static_cast<long>(n1 * data.dim));
  d2.values.assign(data.values.begin() + static_cast<long>(n1 * data.dim),
                   data.values.end());

  RandomStream rng(config.seed);
  RandomStream decode_rng = rng.split(1);
  RandomStream phs_rng = rng.split(2);

  LearnResult result;
  result.report.n1 = n1;
  result.report.n2 = data.rows() - n1;

  SimplexNet net =
      simplex_net(config.k, 1.0 / static_cast<double>(p.net_r), kStreamGuard);
  result.report.net_size = net.size();

  std::vector<Model> hypotheses;
  if (p.desk) {
    DeskComponents desk = desk_decode(config, family, p, d1, decode_rng);
    result.report.decoder_cap = desk.decoder_cap;
    result.report.ledger = desk.ledger;
    if (desk.failed) {
      throw DecoderFailureError(
          "list decoder produced no candidates (desk profile)");
    }
    const std::size_t survivors = static_cast<std::size_t>(std::min(
        static_cast<double>(data.dim == 1 ? kDeskSurvivors1d
                                          : kDeskSurvivorsNd),
        config.candidate_cap));
    std::vector<Mixture> mixtures = desk_preselect(
        desk, net, config, survivors, &result.report.enumerated);
    if (mixtures.empty()) {
      throw DecoderFailureError("desk preselection kept no candidates");
    }
    for (auto& mix : mixtures) hypotheses.push_back(std::move(mix));
  } else {
    CandidateList list = faithful_decode(config, family, p, d1, decode_rng);
    result.report.decoder_cap = list.cap;
    result.report.ledger.add_subledger(list.ledger, "list-decoder");
    if (list.failed || list.hypotheses.empty()) {
      throw DecoderFailureError("list decoder failed (empty candidate set)");
    }
    CandidateMixtureSet mixture_set = build_candidate_mixtures(
        list.hypotheses, net, config.candidate_cap, config.dedup_radius);
    result.report.enumerated = mixture_set.enumerated;
    for (auto& mix : mixture_set.mixtures) hypotheses.push_back(std::move(mix));
  }
  result.report.candidates = hypotheses.size();

  PhsOptions phs_options;
  phs_options.effort = config.phs_effort;
  const PrivacyBudget phs_budget{config.budget.epsilon / 2.0, 0.0};
  PhsResult phs = phs_select(phs_budget, config.alpha, config.beta / 2.0,
                             hypotheses, d2, phs_rng, phs_options);

  // The selection reservation (eps/2, 0) plus the decoder's spend must
  // recompose within the caller's budget.
  result.report.ledger.add(phs_budget, "hypothesis-selection");
  result.report.ledger.check_within(config.budget);
  result.report.budget_spent = result.report.ledger.total();
  result.report.selected_score = phs.scores[phs.index];

  result.model = std::get<Mixture>(phs.selected);
  return result;
}

nlohmann::json report_to_json(const LearnReport& report) {
  nlohmann::json ledger = nlohmann::json::array();
  for (const auto& e : report.ledger.entries()) {
    if (e.advanced) {
      ledger.push_back({{"tag", e.tag},
                        {"advanced", true},
                        {"eps0", e.eps0},
                        {"steps", e.step_deltas.size()},
                        {"delta0", e.delta0}});
    } else {
      ledger.push_back({{"tag", e.tag},
                        {"epsilon", e.charge.epsilon},
                        {"delta", e.charge.delta}});
    }
  }
  return {{"n1", report.n1},
          {"n2", report.n2},
          {"L", report.decoder_cap},
          {"net_size", report.net_size},
          {"candidates", report.candidates},
          {"enumerated", report.enumerated},
          {"selected_score", report.selected_score},
          {"budget_ledger", ledger},
          {"budget_spent", {{"epsilon", report.budget_spent.epsilon},
                            {"delta", report.budget_spent.delta}}}};
}

}  // namespace dpmix
