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

#ifndef DPMIX_DECODERS_HPP
#define DPMIX_DECODERS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "dpmix/budget.hpp"
#include "dpmix/histogram.hpp"
#include "dpmix/models.hpp"

namespace dpmix {

// Private list decoders. Every decoder is (eps, delta)-DP by construction:
// only stable histograms touch the data, and each run records its mechanism
// invocations in a ledger that is re-composed and checked against the input
// budget before returning.
//
// Failure is explicit and encoded as an empty list with failed=true: a heavy
// set over its cap aborts the decode, never truncates it.

// Coarse mean candidates {i*sigma_tilde : i heavy}; one is within sigma of
// the target mean with probability 1-beta at the planned sample size.
struct CoarseMeanList {
  std::vector<double> values;  // ascending
  bool failed = false;
  double cap = 0.0;  // 12/(1-gamma)
  // (value, released estimate) pairs; post-processing input for callers.
  std::vector<std::pair<double, double>> weighted;
  HistogramEstimate histogram;
  BudgetLedger ledger;
};

// Coarse scale candidates {2^{i+1} : i heavy}; one lies in [sigma, 2*sigma).
struct CoarseScaleList {
  std::vector<double> values;  // ascending powers of two
  bool failed = false;
  double cap = 0.0;  // 12/(1-gamma)^2
  std::vector<std::pair<double, double>> weighted;
  HistogramEstimate histogram;
  BudgetLedger ledger;
};

// Output of the two-stage univariate decoder: refined mean and scale grids,
// plus the per-scale-branch structure the mixture learner's desk profile
// consumes (all of it post-processing of released histogram estimates).
struct RefinedParameterLists {
  std::vector<double> means;
  std::vector<double> scales;
  bool failed = false;
  double mean_cap = 0.0;   // 144 (2 ceil(1/alpha)+1) / (1-gamma)^3
  double scale_cap = 0.0;  // 12 ceil(log_{1+alpha} 2) / (1-gamma)^2
  BudgetSplitPlan split;
  BudgetLedger ledger;

  struct Branch {
    double sigma_tilde = 0.0;
    double weight = 0.0;  // released variance-stage estimate for this scale
    std::vector<std::pair<double, double>> coarse_means;  // (mu_tilde, estimate)
    std::vector<double> refined_means;
    std::vector<double> refined_scales;
    HistogramEstimate mean_histogram;
  };
  std::vector<Branch> branches;
};

struct CandidateList {
  std::vector<Model> hypotheses;
  double cap = 0.0;
  bool failed = false;
  BudgetLedger ledger;
};

// Heavy-set selection shared by the histogram decoders: bins whose released
// estimate exceeds `threshold`, failing (empty, failed=true) when more than
// `cap` qualify. Never truncates.
struct HeavySelection {
  std::vector<std::pair<std::int64_t, double>> bins;
  bool failed = false;
};
HeavySelection select_heavy_bins(const HistogramEstimate& hist,
                                 double threshold, double cap);

// ---- List-size cap formulas ------------------------------------------------

double coarse_mean_cap(double gamma);                           // 12/(1-g)
double coarse_scale_cap(double gamma);                          // 12/(1-g)^2
double refined_mean_cap(double alpha, double gamma);
double refined_scale_cap(double alpha, double gamma);
double known_variance_cap(double alpha, double gamma);
double identity_covariance_cap(double alpha, double gamma, std::size_t d);
// log of the d-dim axis-aligned cap (the cap itself can overflow a double)
double multivariate_log_cap(double alpha, double gamma, std::size_t d);

// ---- Sample-size planning -------------------------------------------------
//
// Each bound is the max of the lemma-shaped term C log(2/(beta delta)) /
// ((1-gamma)^p eps) and a threshold-clearing term ensuring the stability
// cutoff t = (1 + 2 ln(2/delta)/eps)/n sits well below the heavy-bin mass
// (1-gamma)^p / 6 that the accuracy argument guarantees.

std::size_t mean_decoder_sample_bound(
    double beta, double gamma, const PrivacyBudget& budget,
    double sample_constant = kDefaultSampleConstant);

// Returned value is the dataset size (twice the number of pairs).
std::size_t variance_decoder_sample_bound(
    double beta, double gamma, const PrivacyBudget& budget,
    double sample_constant = kDefaultSampleConstant);

struct GaussianDecoderPlan {
  std::size_t n1 = 0;  // variance-stage dataset allotment (even)
  std::size_t n2 = 0;  // mean-stage allotment
  std::size_t total = 0;
  BudgetSplitPlan split;
};
GaussianDecoderPlan univariate_gaussian_decoder_plan(
    double beta, double gamma, const PrivacyBudget& budget,
    double sample_constant = kDefaultSampleConstant);

// ---- Decoders (Algorithms 1-4 and corollaries) ----------------------------

CoarseMeanList univariate_mean_decoder(double beta, double gamma,
                                       const PrivacyBudget& budget,
                                       double sigma_tilde,
                                       std::span<const double> data,
                                       RandomStream& rng);

// Data size must be even; consecutive samples are paired into
// |(x_{2k} - x_{2k-1})| / sqrt(2). Zero differences fall in no dyadic bin.
CoarseScaleList univariate_variance_decoder(double beta, double gamma,
                                            const PrivacyBudget& budget,
                                            std::span<const double> data,
                                            RandomStream& rng);

RefinedParameterLists univariate_gaussian_decoder(double alpha, double beta,
                                                  double gamma,
                                                  const PrivacyBudget& budget,
                                                  std::span<const double> data,
                                                  RandomStream& rng);

// Cross product {N(mu, sigma^2) : mu in means, sigma in scales} of a refined
// decode; privacy-free post-processing.
CandidateList candidates_from_refined(const RefinedParameterLists& refined);

// Known-variance decoder: mean decoder plus a 2*alpha*sigma-stepped net over
// each [mu_tilde - sigma, mu_tilde + sigma]. alpha is clamped to 2/3.
CandidateList known_variance_list_decoder(double alpha, double beta,
                                          double gamma,
                                          const PrivacyBudget& budget,
                                          double sigma,
                                          std::span<const double> data,
                                          RandomStream& rng);

CandidateList full_univariate_list_decoder(double alpha, double beta,
                                           double gamma,
                                           const PrivacyBudget& budget,
                                           std::span<const double> data,
                                           RandomStream& rng);

// Per-coordinate refined decodes at (alpha/d, beta/d, eps/d, delta/d); the
// flat candidate set is their cross product.
struct MultivariateDecodeResult {
  std::vector<RefinedParameterLists> coordinates;
  bool failed = false;
  double cap = 0.0;
  BudgetLedger ledger;
};
MultivariateDecodeResult multivariate_decode_detail(double alpha, double beta,
                                                    double gamma,
                                                    const PrivacyBudget& budget,
                                                    const Dataset& data,
                                                    RandomStream& rng);
// Materializes the cross product; throws CandidateOverflowError beyond an
// internal materialization guard (the learner's desk profile never needs it).
CandidateList multivariate_gaussian_decoder(double alpha, double beta,
                                            double gamma,
                                            const PrivacyBudget& budget,
                                            const Dataset& data,
                                            RandomStream& rng);

struct IdentityDecodeResult {
  std::vector<CoarseMeanList> coordinates;
  std::vector<std::vector<double>> refined_means;  // per-coordinate nets
  bool failed = false;
  double cap = 0.0;
  BudgetLedger ledger;
};
IdentityDecodeResult identity_decode_detail(double alpha, double beta,
                                            double gamma,
                                            const PrivacyBudget& budget,
                                            const Dataset& data,
                                            RandomStream& rng);
CandidateList identity_covariance_list_decoder(double alpha, double beta,
                                               double gamma,
                                               const PrivacyBudget& budget,
                                               const Dataset& data,
                                               RandomStream& rng);

// {"means":[...], "scales":[...], "failed":bool,
//  "budget_spent":{"epsilon":..., "delta":...}}
nlohmann::json decoder_result_to_json(const RefinedParameterLists& r);
nlohmann::json decoder_result_to_json(const CoarseMeanList& r);
nlohmann::json decoder_result_to_json(const CoarseScaleList& r);

}  // namespace dpmix

#endif  // DPMIX_DECODERS_HPP
