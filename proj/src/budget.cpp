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

#include "dpmix/budget.hpp"

#include <cmath>
#include <utility>

#include "dpmix/errors.hpp"

namespace dpmix {

void validate_entry_budget(const PrivacyBudget& budget, std::size_t n) {
  if (!(budget.epsilon > 0.0)) {
    throw InvalidParameterError("epsilon must be positive");
  }
  if (n == 0) {
    throw InvalidInputError("dataset must be nonempty");
  }
  if (!(budget.delta > 0.0) || budget.delta >= 1.0 / static_cast<double>(n)) {
    throw BudgetViolationError("delta must lie in (0, 1/n); got delta=" +
                               std::to_string(budget.delta) + " with n=" +
                               std::to_string(n));
  }
}

PrivacyBudget compose_basic(std::span<const PrivacyBudget> budgets) {
  if (budgets.empty()) {
    throw InvalidParameterError("compose_basic requires a nonempty list");
  }
  PrivacyBudget out{0.0, 0.0};
  for (const auto& b : budgets) {
    out.epsilon += b.epsilon;
    out.delta += b.delta;
  }
  return out;
}

PrivacyBudget compose_advanced(double epsilon0,
                               std::span<const double> per_step_deltas,
                               double delta0) {
  if (epsilon0 > 1.0) {
    throw InvalidParameterError(
        "advanced composition requires epsilon0 <= 1");
  }
  if (!(delta0 > 0.0)) {
    throw InvalidParameterError("advanced composition requires delta0 > 0");
  }
  if (per_step_deltas.empty()) {
    throw InvalidParameterError("advanced composition requires T >= 1");
  }
  const double steps = static_cast<double>(per_step_deltas.size());
  double delta = delta0;
  for (double d : per_step_deltas) delta += d;
  const double eps = epsilon0 * std::sqrt(6.0 * steps * std::log(1.0 / delta0));
  return {eps, delta};
}

BudgetSplitPlan plan_budget_split_alg3(const PrivacyBudget& budget,
                                       double gamma) {
  // The worked examples use gamma = 0, so the valid range is [0, 1).
  if (!(gamma >= 0.0) || !(gamma < 1.0)) {
    throw InvalidParameterError("gamma must lie in [0,1)");
  }
  if (!(budget.epsilon > 0.0) || !(budget.delta > 0.0)) {
    throw InvalidParameterError("budget split requires epsilon, delta > 0");
  }
  BudgetSplitPlan plan;
  const double one_minus = 1.0 - gamma;
  plan.steps = ceil_quotient(12.0 / (one_minus * one_minus));
  const double t = static_cast<double>(plan.steps);
  plan.eps_prime =
      budget.epsilon /
      (2.0 * std::sqrt(6.0 * t * std::log(2.0 * (t + 1.0) / budget.delta)));
  plan.delta_prime = budget.delta / (2.0 * (t + 1.0));
  plan.variance_budget = budget.half();

  // Recompose to confirm the plan never exceeds the input budget. The
  // advanced block uses delta0 = delta/(2(T+1)) = delta', so the mean stage
  // totals exactly (eps/2, delta/2).
  std::vector<double> deltas(static_cast<std::size_t>(plan.steps),
                             plan.delta_prime);
  const PrivacyBudget mean_stage =
      compose_advanced(plan.eps_prime, deltas, plan.delta_prime);
  const PrivacyBudget totals[] = {mean_stage, plan.variance_budget};
  const PrivacyBudget total = compose_basic(totals);
  const double tol = 1e-12;
  if (total.epsilon > budget.epsilon * (1.0 + tol) ||
      total.delta > budget.delta * (1.0 + tol)) {
    throw BudgetViolationError("budget split plan exceeds input budget");
  }
  return plan;
}

void BudgetLedger::add(const PrivacyBudget& charge, std::string tag) {
  Entry e;
  e.tag = std::move(tag);
  e.charge = charge;
  entries_.push_back(std::move(e));
}

void BudgetLedger::add_advanced_group(double eps0,
                                      std::vector<double> step_deltas,
                                      double delta0, std::string tag) {
  Entry e;
  e.tag = std::move(tag);
  e.advanced = true;
  e.eps0 = eps0;
  e.step_deltas = std::move(step_deltas);
  e.delta0 = delta0;
  entries_.push_back(std::move(e));
}

void BudgetLedger::add_subledger(const BudgetLedger& sub, std::string tag) {
  add(sub.total(), std::move(tag));
}

PrivacyBudget BudgetLedger::total() const {
  PrivacyBudget out{0.0, 0.0};
  for (const auto& e : entries_) {
    PrivacyBudget part = e.charge;
    if (e.advanced) {
      part = e.step_deltas.empty()
                 ? PrivacyBudget{0.0, 0.0}
                 : compose_advanced(e.eps0, e.step_deltas, e.delta0);
    }
    out.epsilon += part.epsilon;
    out.delta += part.delta;
  }
  return out;
}

void BudgetLedger::check_within(const PrivacyBudget& input) const {
  const PrivacyBudget t = total();
  const double tol = 1e-12;
  if (t.epsilon > input.epsilon * (1.0 + tol) + tol * tol ||
      t.delta > input.delta * (1.0 + tol) + tol * tol) {
    throw BudgetViolationError(
        "recorded mechanism invocations exceed the input budget: spent (" +
        std::to_string(t.epsilon) + ", " + std::to_string(t.delta) +
        ") vs allowed (" + std::to_string(input.epsilon) + ", " +
        std::to_string(input.delta) + ")");
  }
}

}  // namespace dpmix
