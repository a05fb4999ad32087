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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recurdp/model.hpp"

namespace recurdp {

/// A real function on the state grid, expressed in the transformed value
/// space of whichever aggregator produced it.
struct ValueFunction {
  std::vector<double> values;

  ValueFunction() = default;
  explicit ValueFunction(std::vector<double> v) : values(std::move(v)) {}
  ValueFunction(std::size_t n, double fill) : values(n, fill) {}

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  double& operator[](std::size_t i) noexcept { return values[i]; }
  std::span<const double> view() const noexcept { return values; }
};

/// Stationary deterministic policy: one action index per state.
struct Policy {
  std::vector<ActionIndex> action_at;

  std::size_t size() const noexcept { return action_at.size(); }
  ActionIndex operator[](std::size_t i) const noexcept { return action_at[i]; }
  bool operator==(const Policy&) const = default;
};

enum class Direction { kMax, kMin };

const char* to_string(Direction d) noexcept;

/// Which bracket endpoint carries the uniform strict margin.
enum class StrictSide { kUpper, kLower };

/// Bounding functions w1 <= w2 of the candidate class [w1, w2] together with
/// the strict-solution margin. At state x the strict side must clear its
/// bound by epsilon * margin_scale[x] (margin_scale empty means 1).
struct Bracket {
  std::vector<double> lower;
  std::vector<double> upper;
  double epsilon = 0.0;
  StrictSide strict_side = StrictSide::kUpper;
  std::vector<double> margin_scale;

  static Bracket constant(std::size_t n, double w1, double w2, double epsilon, StrictSide side);

  std::size_t size() const noexcept { return lower.size(); }
  double margin_at(StateIndex x) const noexcept {
    return margin_scale.empty() ? epsilon : epsilon * margin_scale[x];
  }
  /// w1 <= v <= w2 up to a relative slack of 1e-12.
  bool contains(std::span<const double> v) const noexcept;
};

enum class Family { kAdditive, kEpsteinZin, kRiskSensitive, kAmbiguity, kNarrowFraming };

const char* to_string(Family f) noexcept;

/// State-action aggregator H(x, a, v): the right-hand side of a Bellman
/// equation as a function of the continuation value. Implementations are
/// immutable and evaluation is pure. `evaluate` may read v only at the
/// successor block {(successor(s, a), z') : z'}.
class Aggregator {
 public:
  virtual ~Aggregator() = default;

  virtual Family family() const noexcept = 0;
  virtual Direction direction() const noexcept = 0;
  virtual double evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                          std::span<const double> v) const = 0;
  /// The family's bracketing functions for `model`.
  virtual Bracket bracket(const ModelSpec& model) const = 0;
  /// Maps a transformed value back to original utility units and back.
  virtual double to_original(double v_hat) const = 0;
  virtual double from_original(double v) const = 0;
  /// Family-specific requirements on the model (e.g. positive rewards).
  virtual void validate(const ModelSpec& model) const { (void)model; }
  virtual std::string describe() const = 0;
};

using AggregatorPtr = std::shared_ptr<const Aggregator>;

/// Conjugate aggregator H'(x, a, v) = -H(x, a, -v). Turns a concave
/// minimization program into a convex maximization program with bracket
/// (-w2, -w1). Throws Error(kDirection) unless `agg` minimizes.
AggregatorPtr conjugate_aggregator(AggregatorPtr agg);

/// Model + aggregator + bracket, plus how residuals are measured.
/// Worker count for state sweeps: hardware concurrency, capped by the
/// RECURDP_THREADS environment variable when it holds a positive integer.
unsigned default_threads() noexcept;

class DynamicProgram {
 public:
  DynamicProgram(std::shared_ptr<const ModelSpec> model, AggregatorPtr agg);
  DynamicProgram(std::shared_ptr<const ModelSpec> model, AggregatorPtr agg, Bracket bracket);

  const ModelSpec& model() const noexcept { return *model_; }
  const std::shared_ptr<const ModelSpec>& model_ptr() const noexcept { return model_; }
  const Aggregator& aggregator() const noexcept { return *agg_; }
  const AggregatorPtr& aggregator_ptr() const noexcept { return agg_; }
  const Bracket& bracket() const noexcept { return bracket_; }
  Direction direction() const noexcept { return agg_->direction(); }
  std::size_t n_states() const noexcept { return model_->n_states(); }

  /// Residual weights: distances become max |u - v| / weight. Empty means
  /// the plain sup norm.
  void set_norm_weights(std::vector<double> weights);
  const std::vector<double>& norm_weights() const noexcept { return norm_weights_; }

  /// Upper bound on worker threads for state sweeps (1 = serial).
  void set_threads(unsigned threads) noexcept { threads_ = threads == 0 ? 1 : threads; }
  unsigned threads() const noexcept { return threads_; }

  /// The bracket endpoint iteration starts from: w1 for max, w2 for min.
  ValueFunction start_point() const;

  double distance(const ValueFunction& u, const ValueFunction& v) const;

 private:
  std::shared_ptr<const ModelSpec> model_;
  AggregatorPtr agg_;
  Bracket bracket_;
  std::vector<double> norm_weights_;
  unsigned threads_ = 1;
};

/// Same model, conjugate aggregator, negated and swapped bracket.
DynamicProgram conjugate_program(const DynamicProgram& program);

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
};

struct SolveReport {
  ValueFunction fixed_point;
  Policy policy;
  std::vector<double> residuals;
  double contraction_estimate = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct BellmanStep {
  ValueFunction values;
  Policy policy;
};

double sup_norm_distance(const ValueFunction& u, const ValueFunction& v);

/// T_sigma v: w(x) = H(x, sigma(x), v).
ValueFunction apply_sigma_operator(const DynamicProgram& program, const Policy& sigma,
                                   const ValueFunction& v);

/// Fixed point of T_sigma, iterated from the program's start point.
ValueFunction solve_sigma_value(const DynamicProgram& program, const Policy& sigma,
                                const SolveOptions& options = {});

/// Optimizes H over feasible actions; ties go to the lowest action index.
BellmanStep apply_bellman(const DynamicProgram& program, const ValueFunction& v);

Policy greedy_policy(const DynamicProgram& program, const ValueFunction& v);

SolveReport value_function_iteration(const DynamicProgram& program,
                                     const SolveOptions& options = {},
                                     std::optional<ValueFunction> v0 = std::nullopt);

/// Geometric mean of the last (up to) ten ratios of consecutive residuals
/// that both exceed noise_floor; 0 when no such pair exists.
double fit_contraction(std::span<const double> residuals, double noise_floor = 0.0);

/// Every state mapped through the aggregator's inverse transform.
ValueFunction to_original_units(const Aggregator& agg, const ValueFunction& v_hat);
ValueFunction from_original_units(const Aggregator& agg, const ValueFunction& v);

}  // namespace recurdp
