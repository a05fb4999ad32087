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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recurdp/dp_core.hpp"

namespace recurdp {

/// Which side of the value-shape inequality to test. kAuto picks convex for
/// maximizing programs and concave for minimizing ones.
enum class ShapeTest { kAuto, kConvex, kConcave };

/// Where the worst violation was seen.
struct Witness {
  std::string check;
  StateIndex state = 0;
  std::optional<ActionIndex> action;
  std::optional<std::size_t> sample;
};

/// Outcome of a numerical certification run. Violations are signed excesses
/// beyond tolerance, so a passing run has worst_violation <= 0.
struct AssumptionReport {
  bool monotone_ok = true;
  bool shape_ok = true;
  bool lower_bound_ok = true;
  bool upper_bound_ok = true;
  bool strict_margin_ok = true;
  double worst_violation = 0.0;
  Witness witness;
  std::size_t samples_used = 0;
  /// One human-readable line per failed check.
  std::vector<std::string> failures;

  bool all_ok() const noexcept {
    return monotone_ok && shape_ok && lower_bound_ok && upper_bound_ok && strict_margin_ok;
  }
};

struct CheckOptions {
  std::size_t n_samples = 200;
  std::uint64_t seed = 0;
  ShapeTest shape = ShapeTest::kAuto;
};

/// Samples value functions inside the bracket and checks, at every feasible
/// pair: monotonicity, convexity/concavity, the lower and upper solution
/// inequalities (with w1 <= w2 folded into the upper check), and the strict
/// margin on the program's strict side. Comparisons use a relative slack of
/// 1e-10 times the magnitude of the compared quantities.
AssumptionReport check_assumptions(const DynamicProgram& program, const CheckOptions& options = {});

struct OracleOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1000000;
  std::size_t guard = 1000000;
  bool keep_per_policy = false;
};

struct OracleResult {
  ValueFunction optimal_value;
  Policy optimal_policy;
  std::size_t policies_enumerated = 0;
  /// Filled when OracleOptions::keep_per_policy is set, in enumeration order.
  std::vector<Policy> policies;
  std::vector<ValueFunction> per_policy_values;
};

/// Product of |Gamma(x)| over states, saturating just above `cap`.
std::size_t count_policies(const ModelSpec& model, std::size_t cap);

/// Solves every stationary policy and takes the pointwise sup (max programs)
/// or inf (min programs). Throws Error(kGuard) beyond `guard` policies.
OracleResult enumerate_policies_oracle(const DynamicProgram& program,
                                       const OracleOptions& options = {});

/// Largest per-state shortfall of H(x, sigma(x), v) against the optimum over
/// feasible actions; zero for a v-greedy sigma.
double greedy_gap(const DynamicProgram& program, const ValueFunction& v, const Policy& sigma);

/// Whether VFI iterates from the bracket endpoint move monotonically (up
/// from w1 for max, down from w2 for min). Returns nullopt when `v0` is
/// given and is not that endpoint.
std::optional<bool> monotone_iterate_check(const DynamicProgram& program,
                                           const SolveOptions& options = {},
                                           std::optional<ValueFunction> v0 = std::nullopt);

}  // namespace recurdp
