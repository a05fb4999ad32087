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

#include "recurdp/unbounded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "recurdp/error.hpp"

namespace recurdp {

namespace {

constexpr double kRelSlack = 1e-12;

void record(WeightCondition& c, double excess, StateIndex x) {
  if (std::isnan(excess)) excess = std::numeric_limits<double>::infinity();
  if (excess > c.worst) {
    c.worst = excess;
    c.state = x;
  }
  c.ok = !(c.worst > 0.0);
}

double theta_of(const EZParams& params) {
  const double theta = params.theta();
  if (!(theta > 1.0) || !(params.rho > 1.0)) {
    throw Error(ErrorCode::kParameter,
                "weighted solver requires 1 < rho < gamma (theta > 1), got rho = " +
                    std::to_string(params.rho) + ", gamma = " + std::to_string(params.gamma));
  }
  return theta;
}

}  // namespace

std::vector<std::string> WeightReport::failures() const {
  std::vector<std::string> out = parameter_failures;
  for (const WeightCondition* c : {&reward_upper, &reward_lower, &growth_upper, &growth_lower}) {
    if (c->ok) continue;
    std::ostringstream os;
    os << c->name << " violated at state " << c->state << " (excess " << c->worst << ")";
    out.push_back(os.str());
  }
  return out;
}

WeightReport check_weight_assumptions(const ModelSpec& model, const EZParams& params,
                                      const WeightSpec& spec) {
  WeightReport report;
  report.reward_upper.name = "reward bound: max_a r(s,a,z) <= M kappa(s,z)";
  report.reward_lower.name = "reward floor: min_a r(s,a,z) >= L kappa(s,z)";
  report.growth_upper.name =
      "weight growth: max_a sum_z' kappa(y,z')^theta P(z,z') <= c kappa(s,z)^theta";
  report.growth_lower.name = "weight floor: min_a sum_z' kappa(y,z') P(z,z') >= d kappa(s,z)";

  const double beta = params.beta;
  const double theta = params.theta();
  auto fail = [&](const std::string& msg) {
    report.parameters_ok = false;
    report.parameter_failures.push_back(msg);
  };
  if (!(theta > 1.0)) fail("theta = (1 - gamma)/(1 - rho) must exceed 1");
  if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0, 1)");
  if (!(spec.L > 0.0) || !(spec.L <= spec.M)) fail("weight constants need 0 < L <= M");
  const double cap = std::pow(beta, -theta);
  if (!(spec.c > 0.0 && spec.c < cap)) fail("c must lie in (0, beta^-theta)");
  if (!(spec.d >= 0.0 && spec.d < cap)) fail("d must lie in [0, beta^-theta)");
  const double delta = spec.delta_value();
  if (!(delta > 0.0 && delta < spec.L)) fail("delta must lie in (0, L)");
  if (spec.kappa.size() != model.n_states()) {
    fail("kappa needs one entry per state");
    return report;
  }
  for (StateIndex x = 0; x < spec.kappa.size(); ++x) {
    if (!(spec.kappa[x] >= 1.0) || !std::isfinite(spec.kappa[x])) {
      fail("kappa must be finite and >= 1 (state " + std::to_string(x) + ")");
      break;
    }
  }
  if (!report.parameters_ok && !(theta > 1.0)) return report;

  for (WeightCondition* c : {&report.reward_upper, &report.reward_lower, &report.growth_upper,
                            &report.growth_lower}) {
    c->worst = -std::numeric_limits<double>::infinity();
  }
  const std::size_t nz = model.n_z();
  for (StateIndex x = 0; x < model.n_states(); ++x) {
    const double k = spec.kappa[x];
    const double k_theta = std::pow(k, theta);
    const std::size_t s = model.endogenous(x);
    const auto row = model.kernel_row(model.exogenous(x));
    double r_max = -std::numeric_limits<double>::infinity();
    double r_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < model.n_a(); ++a) {
      if (!model.is_feasible(x, a)) continue;
      const double r = model.reward_at(x, a);
      r_max = std::max(r_max, r);
      r_min = std::min(r_min, r);
      const std::size_t y = model.next_endogenous(s, a);
      double up = 0.0;
      double lo = 0.0;
      for (std::size_t zp = 0; zp < nz; ++zp) {
        const double ky = spec.kappa[y * nz + zp];
        up += std::pow(ky, theta) * row[zp];
        lo += ky * row[zp];
      }
      g_max = std::max(g_max, up);
      g_min = std::min(g_min, lo);
    }
    auto excess = [](double lhs, double rhs) {
      return lhs - rhs - kRelSlack * std::max(std::abs(lhs), std::abs(rhs));
    };
    record(report.reward_upper, excess(r_max, spec.M * k), x);
    record(report.reward_lower, excess(spec.L * k, r_min), x);
    record(report.growth_upper, excess(g_max, spec.c * k_theta), x);
    record(report.growth_lower, excess(spec.d * k, g_min), x);
  }
  report.worst_violation = std::max({report.reward_upper.worst, report.reward_lower.worst,
                                     report.growth_upper.worst, report.growth_lower.worst});
  if (!report.parameters_ok) {
    report.worst_violation = std::numeric_limits<double>::infinity();
  }
  return report;
}

Bracket weighted_bracket(const EZParams& params, const WeightSpec& spec) {
  const double theta = theta_of(params);
  const double delta = spec.delta_value();
  if (!(delta > 0.0 && delta < spec.L)) {
    throw Error(ErrorCode::kParameter, "weight delta must lie in (0, L)");
  }
  const double denom = 1.0 - params.beta * std::pow(spec.c, 1.0 / theta);
  if (!(denom > 0.0)) throw Error(ErrorCode::kParameter, "c must lie in (0, beta^-theta)");
  const double low = std::pow(spec.L - delta, theta);
  const double high = std::pow(spec.M / denom, theta);
  Bracket b;
  b.lower.resize(spec.kappa.size());
  b.upper.resize(spec.kappa.size());
  b.margin_scale.resize(spec.kappa.size());
  for (std::size_t x = 0; x < spec.kappa.size(); ++x) {
    const double k_theta = std::pow(spec.kappa[x], theta);
    b.lower[x] = low * spec.kappa[x];
    b.upper[x] = high * k_theta;
    b.margin_scale[x] = k_theta;
  }
  b.epsilon = std::pow(spec.L, theta) - low;
  b.strict_side = StrictSide::kLower;
  return b;
}

double weighted_norm(const ValueFunction& v, const WeightSpec& spec, double theta) {
  if (v.size() != spec.kappa.size()) {
    throw Error(ErrorCode::kShape, "value function and kappa differ in length");
  }
  double out = 0.0;
  for (std::size_t x = 0; x < v.size(); ++x) {
    out = std::max(out, std::abs(v[x]) / std::pow(spec.kappa[x], theta));
  }
  return out;
}

DynamicProgram weighted_program(std::shared_ptr<const ModelSpec> model, const EZParams& params,
                                const WeightSpec& spec) {
  const double theta = theta_of(params);
  if (spec.kappa.size() != model->n_states()) {
    throw Error(ErrorCode::kShape, "kappa needs one entry per state");
  }
  auto agg = std::make_shared<EpsteinZinAggregator>(params);
  agg->validate(*model);
  std::vector<double> weights(spec.kappa.size());
  for (std::size_t x = 0; x < weights.size(); ++x) weights[x] = std::pow(spec.kappa[x], theta);
  DynamicProgram program(std::move(model), std::move(agg), weighted_bracket(params, spec));
  program.set_norm_weights(std::move(weights));
  return program;
}

SolveReport solve_unbounded_ez(std::shared_ptr<const ModelSpec> model, const EZParams& params,
                               const WeightSpec& spec, const SolveOptions& options) {
  const WeightReport report = check_weight_assumptions(*model, params, spec);
  if (!report.all_ok()) {
    const auto f = report.failures();
    throw Error(ErrorCode::kAssumption,
                "weight assumptions fail: " + (f.empty() ? std::string("unknown") : f.front()));
  }
  return value_function_iteration(weighted_program(std::move(model), params, spec), options);
}

}  // namespace recurdp
