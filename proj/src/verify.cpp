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

#include "recurdp/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "recurdp/error.hpp"

namespace recurdp {

namespace {

constexpr double kRelSlack = 1e-10;

enum Check : std::size_t { kMonotone, kShape, kLower, kUpper, kOrdering, kStrict, kNumChecks };

constexpr std::array<const char*, kNumChecks> kCheckNames = {
    "monotonicity: v <= v' implies H(x,a,v) <= H(x,a,v')",
    "value shape (convexity/concavity in v)",
    "lower solution: w1(x) <= H(x,a,w1)",
    "upper solution: H(x,a,w2) <= w2(x)",
    "upper solution ordering: w1 <= w2",
    "strict solution margin",
};

struct Tally {
  std::array<double, kNumChecks> worst;
  std::array<Witness, kNumChecks> where;

  Tally() { worst.fill(-std::numeric_limits<double>::infinity()); }

  void record(Check c, double violation, StateIndex x, std::optional<ActionIndex> a,
              std::optional<std::size_t> sample) {
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    if (violation > worst[c]) {
      worst[c] = violation;
      where[c] = Witness{kCheckNames[c], x, a, sample};
    }
  }
};

// Comparison slack: relative to the compared quantities, with the smaller
// bracket endpoint magnitude as a floor against cancellation near zero.
double slack(double a, double b, double floor) {
  return kRelSlack * std::max({std::abs(a), std::abs(b), floor});
}

std::string describe_witness(const Witness& w, double violation) {
  std::ostringstream os;
  os << w.check << " violated at state " << w.state;
  if (w.action) os << ", action " << *w.action;
  if (w.sample) os << ", sample " << *w.sample;
  os << " (excess " << violation << ")";
  return os.str();
}

}  // namespace

AssumptionReport check_assumptions(const DynamicProgram& program, const CheckOptions& options) {
  const ModelSpec& model = program.model();
  const Aggregator& agg = program.aggregator();
  const Bracket& br = program.bracket();
  const std::size_t n = model.n_states();
  const bool convex = options.shape == ShapeTest::kAuto
                          ? program.direction() == Direction::kMax
                          : options.shape == ShapeTest::kConvex;
  Tally tally;

  std::vector<double> lo(n), hi(n), floor(n);
  for (StateIndex x = 0; x < n; ++x) {
    lo[x] = std::min(br.lower[x], br.upper[x]);
    hi[x] = std::max(br.lower[x], br.upper[x]);
    floor[x] = std::min(std::abs(br.lower[x]), std::abs(br.upper[x]));
  }

  auto eval = [&](StateIndex x, ActionIndex a, std::span<const double> v, double& out) {
    try {
      out = agg.evaluate(model, x, a, v);
      return std::isfinite(out);
    } catch (const Error&) {
      return false;
    }
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Bracket endpoint inequalities, evaluated once.
  for (StateIndex x = 0; x < n; ++x) {
    const double gap = br.lower[x] - br.upper[x];
    tally.record(kOrdering, gap - slack(br.lower[x], br.upper[x], 0.0), x, std::nullopt,
                 std::nullopt);
    for (ActionIndex a = 0; a < model.n_a(); ++a) {
      if (!model.is_feasible(x, a)) continue;
      double h1 = 0.0;
      double h2 = 0.0;
      const bool ok1 = eval(x, a, br.lower, h1);
      const bool ok2 = eval(x, a, br.upper, h2);
      const double w1 = br.lower[x];
      const double w2 = br.upper[x];
      tally.record(kLower, ok1 ? w1 - h1 - slack(w1, h1, floor[x]) : kInf, x, a, std::nullopt);
      tally.record(kUpper, ok2 ? h2 - w2 - slack(w2, h2, floor[x]) : kInf, x, a, std::nullopt);
      const double margin = br.margin_at(x);
      double strict = kInf;
      if (!(br.epsilon > 0.0)) {
        strict = std::isfinite(br.epsilon) ? -br.epsilon : kInf;
      } else if (br.strict_side == StrictSide::kUpper) {
        if (ok2) strict = h2 - (w2 - margin) - slack(w2, h2, floor[x]);
      } else if (ok1) {
        strict = (w1 + margin) - h1 - slack(w1, h1, floor[x]);
      }
      tally.record(kStrict, strict, x, a, std::nullopt);
    }
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(n), vp(n), w(n), mix(n);
  for (std::size_t s = 0; s < options.n_samples; ++s) {
    for (StateIndex x = 0; x < n; ++x) v[x] = lo[x] + unit(rng) * (hi[x] - lo[x]);
    for (StateIndex x = 0; x < n; ++x) vp[x] = v[x] + unit(rng) * (hi[x] - v[x]);
    for (StateIndex x = 0; x < n; ++x) w[x] = lo[x] + unit(rng) * (hi[x] - lo[x]);
    const double lambda = unit(rng);
    for (StateIndex x = 0; x < n; ++x) {
      mix[x] = std::clamp(lambda * v[x] + (1.0 - lambda) * w[x], lo[x], hi[x]);
    }
    for (StateIndex x = 0; x < n; ++x) {
      for (ActionIndex a = 0; a < model.n_a(); ++a) {
        if (!model.is_feasible(x, a)) continue;
        double hv = 0.0, hvp = 0.0, hw = 0.0, hmix = 0.0;
        const bool ok_v = eval(x, a, v, hv);
        const bool ok_vp = eval(x, a, vp, hvp);
        const bool ok_w = eval(x, a, w, hw);
        const bool ok_mix = eval(x, a, mix, hmix);
        tally.record(kMonotone, ok_v && ok_vp ? hv - hvp - slack(hv, hvp, floor[x]) : kInf, x, a,
                     s);
        double shape = kInf;
        if (ok_v && ok_w && ok_mix) {
          const double chord = lambda * hv + (1.0 - lambda) * hw;
          const double tol = kRelSlack * std::max({std::abs(hv), std::abs(hw), std::abs(hmix),
                                                   floor[x]});
          shape = convex ? hmix - chord - tol : chord - hmix - tol;
        }
        tally.record(kShape, shape, x, a, s);
      }
    }
  }

  AssumptionReport report;
  report.samples_used = options.n_samples;
  report.monotone_ok = !(tally.worst[kMonotone] > 0.0);
  report.shape_ok = !(tally.worst[kShape] > 0.0);
  report.lower_bound_ok = !(tally.worst[kLower] > 0.0);
  report.upper_bound_ok = !(tally.worst[kUpper] > 0.0) && !(tally.worst[kOrdering] > 0.0);
  report.strict_margin_ok = !(tally.worst[kStrict] > 0.0);
  report.worst_violation = -kInf;
  for (std::size_t c = 0; c < kNumChecks; ++c) {
    if (tally.worst[c] > report.worst_violation) {
      report.worst_violation = tally.worst[c];
      report.witness = tally.where[c];
    }
    if (tally.worst[c] > 0.0) {
      report.failures.push_back(describe_witness(tally.where[c], tally.worst[c]));
    }
  }
  if (!std::isfinite(report.worst_violation) && report.worst_violation < 0.0) {
    report.worst_violation = 0.0;
  }
  return report;
}

std::size_t count_policies(const ModelSpec& model, std::size_t cap) {
  std::size_t total = 1;
  for (StateIndex x = 0; x < model.n_states(); ++x) {
    const std::size_t k = model.feasible_actions(x).size();
    if (k != 0 && total > (cap + 1) / k) return cap + 1;
    total *= k;
    if (total > cap) return cap + 1;
  }
  return total;
}

OracleResult enumerate_policies_oracle(const DynamicProgram& program,
                                       const OracleOptions& options) {
  const ModelSpec& model = program.model();
  const std::size_t n = model.n_states();
  const std::size_t total = count_policies(model, options.guard);
  if (total > options.guard) {
    throw Error(ErrorCode::kGuard, "more than " + std::to_string(options.guard) +
                                       " stationary policies; enumeration refused");
  }
  std::vector<std::vector<ActionIndex>> choices(n);
  for (StateIndex x = 0; x < n; ++x) choices[x] = model.feasible_actions(x);

  // Mixed-radix decode with the last state varying fastest.
  auto decode = [&](std::size_t index) {
    Policy p;
    p.action_at.resize(n);
    for (std::size_t i = n; i-- > 0;) {
      const std::size_t k = choices[i].size();
      p.action_at[i] = choices[i][index % k];
      index /= k;
    }
    return p;
  };

  const bool maximize = program.direction() == Direction::kMax;
  const SolveOptions solve{options.tol, options.max_iter};
  OracleResult out;
  out.policies_enumerated = total;
  out.optimal_value = ValueFunction(n, 0.0);
  out.optimal_policy.action_at.assign(n, 0);
  std::vector<bool> seen(n, false);

  constexpr std::size_t kBlock = 1024;
  std::vector<Policy> block_policies;
  std::vector<ValueFunction> block_values;
  for (std::size_t start = 0; start < total; start += kBlock) {
    const std::size_t count = std::min(kBlock, total - start);
    block_policies.resize(count);
    block_values.resize(count);
    for (std::size_t i = 0; i < count; ++i) block_policies[i] = decode(start + i);
    DynamicProgram serial = program;
    serial.set_threads(1);
    detail::parallel_for(
        count, program.threads(),
        [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) {
            block_values[i] = solve_sigma_value(serial, block_policies[i], solve);
          }
        },
        2);
    for (std::size_t i = 0; i < count; ++i) {
      const ValueFunction& vs = block_values[i];
      const Policy& ps = block_policies[i];
      for (StateIndex x = 0; x < n; ++x) {
        double& best = out.optimal_value[x];
        ActionIndex& act = out.optimal_policy.action_at[x];
        const double tie = 1e-9 * std::max(std::abs(best), std::abs(vs[x]));
        const bool better = maximize ? vs[x] > best + tie : vs[x] < best - tie;
        if (!seen[x] || better) {
          best = vs[x];
          act = ps[x];
          seen[x] = true;
        } else if (std::abs(vs[x] - best) <= tie) {
          best = maximize ? std::max(best, vs[x]) : std::min(best, vs[x]);
          act = std::min(act, ps[x]);
        }
      }
      if (options.keep_per_policy) {
        out.policies.push_back(ps);
        out.per_policy_values.push_back(vs);
      }
    }
  }
  return out;
}

double greedy_gap(const DynamicProgram& program, const ValueFunction& v, const Policy& sigma) {
  const ModelSpec& model = program.model();
  const Aggregator& agg = program.aggregator();
  const bool maximize = program.direction() == Direction::kMax;
  double gap = 0.0;
  for (StateIndex x = 0; x < model.n_states(); ++x) {
    const double chosen = agg.evaluate(model, x, sigma[x], v.view());
    for (ActionIndex a = 0; a < model.n_a(); ++a) {
      if (!model.is_feasible(x, a)) continue;
      const double h = agg.evaluate(model, x, a, v.view());
      gap = std::max(gap, maximize ? h - chosen : chosen - h);
    }
  }
  return gap;
}

std::optional<bool> monotone_iterate_check(const DynamicProgram& program,
                                           const SolveOptions& options,
                                           std::optional<ValueFunction> v0) {
  ValueFunction v = program.start_point();
  if (v0 && v0->values != v.values) return std::nullopt;
  const bool up = program.direction() == Direction::kMax;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    ValueFunction next = apply_bellman(program, v).values;
    for (StateIndex x = 0; x < v.size(); ++x) {
      const double tol = 1e-12 * std::max(std::abs(v[x]), std::abs(next[x]));
      if (up ? next[x] < v[x] - tol : next[x] > v[x] + tol) return false;
    }
    const double r = program.distance(next, v);
    v = std::move(next);
    if (r <= options.tol) break;
  }
  return true;
}

}  // namespace recurdp
