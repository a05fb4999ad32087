// Copyright 2026 The recurdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recurdp/aggregators.hpp"
#include "recurdp/dp_core.hpp"

namespace recurdp {

/// Weight function and constants for the weighted-norm Epstein-Zin solver
/// (1 < rho < gamma, so theta > 1).
struct WeightSpec {
  std::vector<double> kappa;  // one entry per state, each >= 1
  double L = 1.0;
  double M = 1.0;
  double c = 1.0;
  double d = 0.0;
  /// Bracket slack in (0, L); defaults to 0.1 L.
  std::optional<double> delta;

  double delta_value() const noexcept { return delta.value_or(0.1 * L); }
};

struct WeightCondition {
  std::string name;
  bool ok = true;
  /// Largest signed excess over all states; positive means violated.
  double worst = 0.0;
  StateIndex state = 0;
};

struct WeightReport {
  bool parameters_ok = true;
  std::vector<std::string> parameter_failures;
  WeightCondition reward_upper;   // max_a r <= M kappa
  WeightCondition reward_lower;   // min_a r >= L kappa
  WeightCondition growth_upper;   // max_a sum kappa(y, z')^theta P(z, z') <= c kappa^theta
  WeightCondition growth_lower;   // min_a sum kappa(y, z') P(z, z') >= d kappa
  double worst_violation = 0.0;

  bool all_ok() const noexcept {
    return parameters_ok && reward_upper.ok && reward_lower.ok && growth_upper.ok &&
           growth_lower.ok;
  }
  std::vector<std::string> failures() const;
};

/// Exhaustive scan of the four weight inequalities plus the parameter ranges.
WeightReport check_weight_assumptions(const ModelSpec& model, const EZParams& params,
                                      const WeightSpec& spec);

/// w1 = (L - delta)^theta kappa, w2 = (M / (1 - beta c^(1/theta)))^theta kappa^theta,
/// strict lower margin (L^theta - (L - delta)^theta) kappa^theta.
Bracket weighted_bracket(const EZParams& params, const WeightSpec& spec);

/// max_x |v(x)| / kappa(x)^theta.
double weighted_norm(const ValueFunction& v, const WeightSpec& spec, double theta);

/// Minimizing program with the weighted bracket and kappa^theta residual weights.
DynamicProgram weighted_program(std::shared_ptr<const ModelSpec> model, const EZParams& params,
                                const WeightSpec& spec);

/// Weighted-norm value function iteration. Throws Error(kAssumption) when the
/// weight conditions fail.
SolveReport solve_unbounded_ez(std::shared_ptr<const ModelSpec> model, const EZParams& params,
                               const WeightSpec& spec, const SolveOptions& options = {});

}  // namespace recurdp
