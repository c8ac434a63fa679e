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

#ifndef DPMIX_BUDGET_HPP
#define DPMIX_BUDGET_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dpmix {

// Ceiling of a computed quotient, forgiving ~1e-9 of floating-point dust so
// values like 12/(1-0.9)^2 land on the intended integer.
inline long long ceil_quotient(double x) {
  return static_cast<long long>(std::ceil(x - 1e-9));
}

// Accuracy constant used in every Omega(.) sample-size bound. The paper fixes
// no constant; 8 meets the failure targets at desk scale and is exposed in
// configuration wherever a plan is computed.
inline constexpr double kDefaultSampleConstant = 8.0;

// An (epsilon, delta) privacy allowance. Plain value type: composition
// arithmetic may produce delta >= 1 (vacuous guarantees), so range checks
// live at mechanism entry points, not here.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  PrivacyBudget half() const { return {epsilon / 2.0, delta / 2.0}; }
  PrivacyBudget scaled(double f) const { return {epsilon * f, delta * f}; }
};

// epsilon > 0 and delta in (0, 1/n); throws BudgetViolationError otherwise.
void validate_entry_budget(const PrivacyBudget& budget, std::size_t n);

// Basic adaptive composition: (sum eps_t, sum delta_t).
PrivacyBudget compose_basic(std::span<const PrivacyBudget> budgets);

// Advanced composition of T mechanisms at epsilon0 each:
// (epsilon0 * sqrt(6 T ln(1/delta0)), delta0 + sum delta_t).
// Requires epsilon0 <= 1, delta0 > 0, T >= 1.
PrivacyBudget compose_advanced(double epsilon0,
                               std::span<const double> per_step_deltas,
                               double delta0);

// Budget split for the two-stage univariate decoder. T is computed from
// gamma alone so the accounting is data-independent.
struct BudgetSplitPlan {
  long long steps = 0;       // T = ceil(12 / (1-gamma)^2)
  double eps_prime = 0.0;    // per mean-decoder call
  double delta_prime = 0.0;  // per mean-decoder call
  PrivacyBudget variance_budget;  // (eps/2, delta/2)
};

// T = ceil(12/(1-gamma)^2), eps' = eps / (2 sqrt(6 T ln(2(T+1)/delta))),
// delta' = delta / (2(T+1)). The advanced composition of T copies of
// (eps', delta') plus the variance budget totals at most (eps, delta);
// asserted numerically at construction.
BudgetSplitPlan plan_budget_split_alg3(const PrivacyBudget& budget,
                                       double gamma);

// Record of the mechanism invocations made by a decoder or learner run.
// Plain entries compose basically; advanced groups compose via the advanced
// rule first, then join the basic sum.
class BudgetLedger {
 public:
  void add(const PrivacyBudget& charge, std::string tag);
  void add_advanced_group(double eps0, std::vector<double> step_deltas,
                          double delta0, std::string tag);
  // Folds a sub-run's total in as a single basic entry.
  void add_subledger(const BudgetLedger& sub, std::string tag);

  PrivacyBudget total() const;
  // Throws BudgetViolationError if total() exceeds `input` in either
  // coordinate beyond 1e-12 relative tolerance.
  void check_within(const PrivacyBudget& input) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  struct Entry {
    std::string tag;
    bool advanced = false;
    PrivacyBudget charge;            // plain entries
    double eps0 = 0.0;               // advanced groups
    std::vector<double> step_deltas;
    double delta0 = 0.0;
  };
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

}  // namespace dpmix

#endif  // DPMIX_BUDGET_HPP
