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

#include "recurdp/dp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "parallel.hpp"
#include "recurdp/error.hpp"

namespace recurdp {

const char* to_string(Direction d) noexcept { return d == Direction::kMax ? "max" : "min"; }

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::kAdditive: return "additive";
    case Family::kEpsteinZin: return "epstein_zin";
    case Family::kRiskSensitive: return "risk_sensitive";
    case Family::kAmbiguity: return "ambiguity";
    case Family::kNarrowFraming: return "narrow_framing";
  }
  return "unknown";
}

Bracket Bracket::constant(std::size_t n, double w1, double w2, double epsilon, StrictSide side) {
  Bracket b;
  b.lower.assign(n, w1);
  b.upper.assign(n, w2);
  b.epsilon = epsilon;
  b.strict_side = side;
  return b;
}

bool Bracket::contains(std::span<const double> v) const noexcept {
  if (v.size() != lower.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double slack = 1e-12 * std::max(std::abs(lower[i]), std::abs(upper[i]));
    if (!std::isfinite(v[i]) || v[i] < lower[i] - slack || v[i] > upper[i] + slack) return false;
  }
  return true;
}

namespace {

class ConjugateAggregator final : public Aggregator {
 public:
  explicit ConjugateAggregator(AggregatorPtr inner) : inner_(std::move(inner)) {}

  Family family() const noexcept override { return inner_->family(); }
  Direction direction() const noexcept override { return Direction::kMax; }

  double evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                  std::span<const double> v) const override {
    // H reads v only on the successor block, so only that block is negated.
    thread_local std::vector<double> negated;
    negated.resize(v.size());
    const std::size_t nz = model.n_z();
    const std::size_t base = model.next_endogenous(model.endogenous(x), a) * nz;
    for (std::size_t zp = 0; zp < nz; ++zp) negated[base + zp] = -v[base + zp];
    return -inner_->evaluate(model, x, a, negated);
  }

  Bracket bracket(const ModelSpec& model) const override {
    Bracket inner = inner_->bracket(model);
    Bracket out;
    out.lower.resize(inner.size());
    out.upper.resize(inner.size());
    for (std::size_t i = 0; i < inner.size(); ++i) {
      out.lower[i] = -inner.upper[i];
      out.upper[i] = -inner.lower[i];
    }
    out.epsilon = inner.epsilon;
    out.strict_side = inner.strict_side == StrictSide::kLower ? StrictSide::kUpper
                                                               : StrictSide::kLower;
    out.margin_scale = std::move(inner.margin_scale);
    return out;
  }

  double to_original(double v_check) const override { return inner_->to_original(-v_check); }
  double from_original(double v) const override { return -inner_->from_original(v); }
  void validate(const ModelSpec& model) const override { inner_->validate(model); }
  std::string describe() const override { return "conjugate of " + inner_->describe(); }

 private:
  AggregatorPtr inner_;
};

void check_shape(const DynamicProgram& program, const ValueFunction& v) {
  if (v.size() != program.n_states()) {
    throw Error(ErrorCode::kShape, "value function has " + std::to_string(v.size()) +
                                       " entries, model has " +
                                       std::to_string(program.n_states()) + " states");
  }
}

void check_in_class(const DynamicProgram& program, const ValueFunction& v) {
  check_shape(program, v);
  if (!program.bracket().contains(v.view())) {
    throw Error(ErrorCode::kDomain, "value function lies outside the bracket [w1, w2]");
  }
}

void check_policy(const DynamicProgram& program, const Policy& sigma) {
  const ModelSpec& model = program.model();
  if (sigma.size() != model.n_states()) {
    throw Error(ErrorCode::kShape, "policy length does not match the number of states");
  }
  for (StateIndex x = 0; x < sigma.size(); ++x) {
    if (sigma[x] >= model.n_a() || !model.is_feasible(x, sigma[x])) {
      throw Error(ErrorCode::kFeasibility, "policy action " + std::to_string(sigma[x]) +
                                               " is infeasible at state " + std::to_string(x));
    }
  }
}

ValueFunction sweep_sigma(const DynamicProgram& program, const Policy& sigma,
                          const ValueFunction& v) {
  const ModelSpec& model = program.model();
  const Aggregator& agg = program.aggregator();
  ValueFunction out(model.n_states(), 0.0);
  detail::parallel_for(model.n_states(), program.threads(), [&](std::size_t b, std::size_t e) {
    for (StateIndex x = b; x < e; ++x) out[x] = agg.evaluate(model, x, sigma[x], v.view());
  });
  return out;
}

BellmanStep sweep_bellman(const DynamicProgram& program, const ValueFunction& v) {
  const ModelSpec& model = program.model();
  const Aggregator& agg = program.aggregator();
  const bool maximize = agg.direction() == Direction::kMax;
  BellmanStep step{ValueFunction(model.n_states(), 0.0), Policy{}};
  step.policy.action_at.assign(model.n_states(), 0);
  detail::parallel_for(model.n_states(), program.threads(), [&](std::size_t b, std::size_t e) {
    for (StateIndex x = b; x < e; ++x) {
      bool found = false;
      double best = 0.0;
      ActionIndex best_a = 0;
      for (ActionIndex a = 0; a < model.n_a(); ++a) {
        if (!model.is_feasible(x, a)) continue;
        const double h = agg.evaluate(model, x, a, v.view());
        if (!found || (maximize ? h > best : h < best)) {
          best = h;
          best_a = a;
          found = true;
        }
      }
      step.values[x] = best;
      step.policy.action_at[x] = best_a;
    }
  });
  return step;
}

// Shared fixed-point loop for T (sigma == nullptr) and T_sigma.
SolveReport iterate(const DynamicProgram& program, const Policy* sigma, ValueFunction v,
                    const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::kParameter, "tol must be positive");
  check_in_class(program, v);
  SolveReport report;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    ValueFunction next = sigma ? sweep_sigma(program, *sigma, v)
                               : sweep_bellman(program, v).values;
    if (!program.bracket().contains(next.view())) {
      throw Error(ErrorCode::kDomain,
                  "iterate " + std::to_string(it + 1) + " escaped the bracket [w1, w2]");
    }
    const double r = program.distance(next, v);
    report.residuals.push_back(r);
    v = std::move(next);
    if (r <= options.tol) {
      report.converged = true;
      break;
    }
  }
  report.iterations = report.residuals.size();
  if (!report.converged) {
    const double last = report.residuals.empty() ? 0.0 : report.residuals.back();
    throw NonConvergenceError("no convergence after " + std::to_string(options.max_iter) +
                                  " iterations (last residual " + std::to_string(last) + ")",
                              std::move(report.residuals));
  }
  // Residuals within a few ulps of the iterate carry no rate information.
  const double scale = program.distance(v, ValueFunction(v.size(), 0.0));
  report.contraction_estimate =
      fit_contraction(report.residuals, 64.0 * std::numeric_limits<double>::epsilon() * scale);
  report.fixed_point = std::move(v);
  return report;
}

}  // namespace

unsigned default_threads() noexcept {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RECURDP_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

AggregatorPtr conjugate_aggregator(AggregatorPtr agg) {
  if (!agg || agg->direction() != Direction::kMin) {
    throw Error(ErrorCode::kDirection, "conjugate aggregator requires a minimizing aggregator");
  }
  return std::make_shared<ConjugateAggregator>(std::move(agg));
}

DynamicProgram::DynamicProgram(std::shared_ptr<const ModelSpec> model, AggregatorPtr agg)
    : model_(std::move(model)), agg_(std::move(agg)) {
  bracket_ = agg_->bracket(*model_);
}

DynamicProgram::DynamicProgram(std::shared_ptr<const ModelSpec> model, AggregatorPtr agg,
                               Bracket bracket)
    : model_(std::move(model)), agg_(std::move(agg)), bracket_(std::move(bracket)) {
  if (bracket_.size() != model_->n_states() || bracket_.upper.size() != bracket_.size()) {
    throw Error(ErrorCode::kShape, "bracket size does not match the number of states");
  }
}

void DynamicProgram::set_norm_weights(std::vector<double> weights) {
  if (!weights.empty() && weights.size() != n_states()) {
    throw Error(ErrorCode::kShape, "norm weights must have one entry per state");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::kParameter, "norm weights must be positive");
  }
  norm_weights_ = std::move(weights);
}

ValueFunction DynamicProgram::start_point() const {
  return ValueFunction(direction() == Direction::kMax ? bracket_.lower : bracket_.upper);
}

double DynamicProgram::distance(const ValueFunction& u, const ValueFunction& v) const {
  if (norm_weights_.empty()) return sup_norm_distance(u, v);
  if (u.size() != v.size() || u.size() != norm_weights_.size()) {
    throw Error(ErrorCode::kShape, "distance between arrays of different lengths");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::abs(u[i] - v[i]) / norm_weights_[i]);
  }
  return d;
}

DynamicProgram conjugate_program(const DynamicProgram& program) {
  AggregatorPtr conj = conjugate_aggregator(program.aggregator_ptr());
  const Bracket& b = program.bracket();
  Bracket nb;
  nb.lower.resize(b.size());
  nb.upper.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    nb.lower[i] = -b.upper[i];
    nb.upper[i] = -b.lower[i];
  }
  nb.epsilon = b.epsilon;
  nb.strict_side = b.strict_side == StrictSide::kLower ? StrictSide::kUpper : StrictSide::kLower;
  nb.margin_scale = b.margin_scale;
  DynamicProgram out(program.model_ptr(), std::move(conj), std::move(nb));
  out.set_norm_weights(program.norm_weights());
  out.set_threads(program.threads());
  return out;
}

double sup_norm_distance(const ValueFunction& u, const ValueFunction& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kShape, "distance between arrays of different lengths");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - v[i]));
  return d;
}

ValueFunction apply_sigma_operator(const DynamicProgram& program, const Policy& sigma,
                                   const ValueFunction& v) {
  check_policy(program, sigma);
  check_in_class(program, v);
  return sweep_sigma(program, sigma, v);
}

ValueFunction solve_sigma_value(const DynamicProgram& program, const Policy& sigma,
                                const SolveOptions& options) {
  check_policy(program, sigma);
  return iterate(program, &sigma, program.start_point(), options).fixed_point;
}

BellmanStep apply_bellman(const DynamicProgram& program, const ValueFunction& v) {
  check_in_class(program, v);
  return sweep_bellman(program, v);
}

Policy greedy_policy(const DynamicProgram& program, const ValueFunction& v) {
  check_in_class(program, v);
  return sweep_bellman(program, v).policy;
}

SolveReport value_function_iteration(const DynamicProgram& program, const SolveOptions& options,
                                     std::optional<ValueFunction> v0) {
  SolveReport report =
      iterate(program, nullptr, v0 ? std::move(*v0) : program.start_point(), options);
  report.policy = sweep_bellman(program, report.fixed_point).policy;
  return report;
}

double fit_contraction(std::span<const double> residuals, double noise_floor) {
  double log_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = residuals.size(); k >= 2 && count < 10; --k) {
    const double prev = residuals[k - 2];
    const double cur = residuals[k - 1];
    if (!(prev > noise_floor) || !(cur > noise_floor)) continue;
    log_sum += std::log(cur / prev);
    ++count;
  }
  return count == 0 ? 0.0 : std::exp(log_sum / static_cast<double>(count));
}

ValueFunction to_original_units(const Aggregator& agg, const ValueFunction& v_hat) {
  ValueFunction out(v_hat.size(), 0.0);
  for (std::size_t i = 0; i < v_hat.size(); ++i) out[i] = agg.to_original(v_hat[i]);
  return out;
}

ValueFunction from_original_units(const Aggregator& agg, const ValueFunction& v) {
  ValueFunction out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = agg.from_original(v[i]);
  return out;
}

}  // namespace recurdp
