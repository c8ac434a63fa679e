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

#ifndef DPMIX_LEARNER_HPP
#define DPMIX_LEARNER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "dpmix/budget.hpp"
#include "dpmix/decoders.hpp"
#include "dpmix/models.hpp"
#include "dpmix/phs.hpp"

namespace dpmix {

// Exact grid {t/r : t in Z_{>=0}^k, ||t||_1 = r} with r = ceil(1/alpha);
// an alpha-net of the simplex under l_infinity of size C(r+k-1, k-1)
// <= (3/alpha)^k. Points are stored as integer tuples so the simplex-sum
// invariant holds exactly.
struct SimplexNet {
  int k = 1;
  double alpha = 1.0;
  long long r = 1;
  std::vector<std::vector<long long>> points;

  std::size_t size() const { return points.size(); }
  std::vector<double> weights(std::size_t idx) const;
};

SimplexNet simplex_net(int k, double alpha, double size_cap = 5e7);

// The constructive rounding from the net's covering proof: a net point
// within 1/r of x in l_infinity.
std::vector<long long> simplex_net_round(std::span<const double> x,
                                         long long r);

// Exact net size C(r+k-1, k-1) as a double (may round for huge values).
double simplex_net_size_bound(int k, long long r);

struct CandidateMixtureSet {
  std::vector<Mixture> mixtures;
  double bound = 0.0;       // |list|^k * |net|
  double enumerated = 0.0;  // tuples actually visited
};

// Full cross product of ordered k-tuples of candidates with net weights;
// data-independent, so privacy-free post-processing. With dedup_radius > 0,
// mixtures are merged during construction when their canonical parameter
// vectors are within the radius under a TV upper-bound metric (weight-L1/2
// plus weighted component TV). The cap applies to the retained count;
// exceeding it (or the streaming guard) raises CandidateOverflowError.
CandidateMixtureSet build_candidate_mixtures(
    const std::vector<Model>& candidates, const SimplexNet& net, double cap,
    double dedup_radius = 0.0);

// TV upper bound between canonically ordered k-component mixtures; the
// dedup metric.
double mixture_distance_bound(const Mixture& a, const Mixture& b);

enum class MixtureFamily {
  kUnivariate,
  kAxisAligned,
  kIdentityCovariance,
  kKnownSigma,
};

MixtureFamily family_from_string(const std::string& name);
std::string family_to_string(MixtureFamily family);

struct LearnerConfig {
  int k = 1;
  double alpha = 0.25;
  double beta = 0.1;
  PrivacyBudget budget{1.0, 1e-6};
  double sample_constant = kDefaultSampleConstant;
  double candidate_cap = 1e5;
  // 0 runs the faithful reduction (decoder at alpha/18, corruption
  // 1 - alpha/18k, net at alpha/18k). A positive radius (< alpha/36)
  // switches to the desk-scale profile: a coarser decoder cascade plus
  // histogram-guided preselection, with this radius used for candidate
  // dedup. See README for the exact profile.
  double dedup_radius = 0.0;
  std::uint64_t seed = 0;
  double known_sigma = 1.0;  // kKnownSigma family
  std::size_t d = 1;         // data dimension for the d-dim families
  long phs_effort = 100000;
};

void validate(const LearnerConfig& config);

struct SampleSizePlan {
  std::size_t n1 = 0;  // decoder allotment
  std::size_t n2 = 0;  // hypothesis-selection allotment
  std::size_t total = 0;
};

// n1 from the family decoder's bound at the reduction's parameters; n2 from
// the PHS term C (k log(Lk/alpha) + log(1/beta)) (1/alpha^2 + 1/(alpha eps)).
// Honors the config's mode (faithful vs desk profile).
SampleSizePlan sample_size_plan(const LearnerConfig& config,
                                MixtureFamily family);

struct LearnReport {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double decoder_cap = 0.0;   // L
  std::size_t net_size = 0;
  std::size_t candidates = 0; // mixtures handed to selection
  double enumerated = 0.0;    // conceptual product size visited
  long long selected_score = 0;
  PrivacyBudget budget_spent;
  BudgetLedger ledger;
};

struct LearnResult {
  Mixture model;
  LearnReport report;
};

// The Learn-Mixture reduction: list-decode components from D1 under heavy
// declared corruption, build candidate mixtures over a simplex net, select
// privately on D2. Decoder budget (eps/2, delta) plus selection (eps/2, 0)
// compose to at most (eps, delta); asserted on every call.
LearnResult learn_mixture(const LearnerConfig& config, MixtureFamily family,
                          const Dataset& data, bool force = false);

nlohmann::json report_to_json(const LearnReport& report);

}  // namespace dpmix

#endif  // DPMIX_LEARNER_HPP
