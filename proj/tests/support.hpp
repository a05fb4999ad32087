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

// Shared fixtures for the test binaries: seeded random models, random
// family parameters, and formula-level reference evaluators written
// independently of the library's aggregator code.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "recurdp/aggregators.hpp"
#include "recurdp/dp_core.hpp"
#include "recurdp/model.hpp"

namespace recurdp::testing {

enum class Fam {
  kAdditive,
  kEzConvex,
  kEzConcave,
  kEzThetaAbove,
  kRiskSensitive,
  kAmbiguity,
  kAmbiguityUnitEis,
  kNarrowFraming,
};

inline const std::vector<Fam>& all_families() {
  static const std::vector<Fam> f = {Fam::kAdditive,      Fam::kEzConvex,     Fam::kEzConcave,
                                     Fam::kEzThetaAbove,  Fam::kRiskSensitive, Fam::kAmbiguity,
                                     Fam::kAmbiguityUnitEis, Fam::kNarrowFraming};
  return f;
}

inline std::string fam_name(Fam f) {
  switch (f) {
    case Fam::kAdditive: return "additive";
    case Fam::kEzConvex: return "ez_convex";
    case Fam::kEzConcave: return "ez_concave";
    case Fam::kEzThetaAbove: return "ez_theta_above";
    case Fam::kRiskSensitive: return "risk_sensitive";
    case Fam::kAmbiguity: return "ambiguity";
    case Fam::kAmbiguityUnitEis: return "ambiguity_rho1";
    case Fam::kNarrowFraming: return "narrow_framing";
  }
  return "?";
}

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::vector<double> random_stochastic(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += (t[r * cols + c] = uniform(rng, 0.05, 1.0));
    for (std::size_t c = 0; c < cols; ++c) t[r * cols + c] /= sum;
    // Push the rounding residue into the last column so rows sum to 1.
    double again = 0.0;
    for (std::size_t c = 0; c + 1 < cols; ++c) again += t[r * cols + c];
    t[r * cols + cols - 1] = 1.0 - again;
  }
  return t;
}

struct ModelShape {
  std::size_t n_s = 2;
  std::size_t n_z = 2;
  std::size_t n_a = 2;
};

/// Random model of the given shape: positive rewards in [r_lo, r_hi],
/// random successors, random feasibility with at least one action per state.
inline std::shared_ptr<ModelSpec> random_model_shaped(Rng& rng, ModelShape shape, double r_lo = 0.5,
                                                      double r_hi = 2.0, bool gamble = false) {
  auto m = std::make_shared<ModelSpec>();
  for (std::size_t i = 0; i < shape.n_s; ++i) m->s_grid.push_back(static_cast<double>(i));
  for (std::size_t i = 0; i < shape.n_z; ++i) m->z_grid.push_back(static_cast<double>(i));
  for (std::size_t i = 0; i < shape.n_a; ++i) m->a_grid.push_back(static_cast<double>(i));
  m->kernel = random_stochastic(rng, shape.n_z, shape.n_z);
  for (std::size_t s = 0; s < shape.n_s; ++s) {
    for (std::size_t a = 0; a < shape.n_a; ++a) m->successor.push_back(pick(rng, 0, shape.n_s - 1));
  }
  const std::size_t n = shape.n_s * shape.n_z;
  m->feasible.assign(n * shape.n_a, 0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t a = 0; a < shape.n_a; ++a) m->feasible[x * shape.n_a + a] = pick(rng, 0, 3) != 0;
    m->feasible[x * shape.n_a + pick(rng, 0, shape.n_a - 1)] = 1;
  }
  m->reward.resize(shape.n_s * shape.n_a * shape.n_z);
  for (double& r : m->reward) r = uniform(rng, r_lo, r_hi);
  if (gamble) {
    m->gamble_utility.emplace(m->reward.size());
    for (double& b : *m->gamble_utility) b = uniform(rng, 0.0, 0.3);
  }
  m->validate();
  return m;
}

inline ModelShape random_shape(Rng& rng, std::size_t max_states, std::size_t max_actions) {
  ModelShape shape;
  shape.n_z = pick(rng, 1, std::min<std::size_t>(2, max_states));
  shape.n_s = pick(rng, 1, std::max<std::size_t>(1, max_states / shape.n_z));
  shape.n_a = pick(rng, 1, max_actions);
  return shape;
}

/// Random model with at most `max_states` states and `max_actions` actions.
inline std::shared_ptr<ModelSpec> random_model(Rng& rng, std::size_t max_states = 5,
                                               std::size_t max_actions = 3, double r_lo = 0.5,
                                               double r_hi = 2.0, bool gamble = false) {
  return random_model_shaped(rng, random_shape(rng, max_states, max_actions), r_lo, r_hi, gamble);
}

inline EZParams random_ez(Rng& rng, Fam f) {
  EZParams p;
  p.beta = uniform(rng, 0.5, 0.9);
  double theta = 0.0;
  switch (f) {
    case Fam::kEzConvex:
      p.rho = uniform(rng, 0.1, 0.6);
      theta = uniform(rng, 0.2, 0.95);
      break;
    case Fam::kEzConcave:
      p.rho = uniform(rng, 0.2, 0.9);
      theta = uniform(rng, -3.0, -0.3);
      break;
    default:
      p.rho = uniform(rng, 1.2, 2.0);
      theta = uniform(rng, 1.2, 3.0);
      break;
  }
  p.gamma = 1.0 - theta * (1.0 - p.rho);
  return p;
}

inline AmbiguityParams random_ambiguity(Rng& rng, std::size_t n_z, bool unit_eis) {
  AmbiguityParams p;
  p.beta = uniform(rng, 0.5, 0.9);
  p.rho = unit_eis ? 1.0 : uniform(rng, 0.3, 0.9);
  p.gamma = uniform(rng, 1.5, 3.0);
  p.eta = p.gamma + uniform(rng, 0.5, 3.0);
  const std::size_t k = pick(rng, 1, 3);
  for (std::size_t i = 0; i < k; ++i) {
    p.theta_labels.push_back(static_cast<double>(i));
    p.kernels.push_back(random_stochastic(rng, n_z, n_z));
  }
  p.mu = random_stochastic(rng, n_z, k);
  return p;
}

inline NarrowFramingParams random_nf(Rng& rng, bool rho_above_one) {
  NarrowFramingParams p;
  p.beta = uniform(rng, 0.5, 0.9);
  if (rho_above_one) {
    p.rho = uniform(rng, 1.2, 2.0);
    p.gamma = 1.0 + uniform(rng, 1.2, 3.0) * (p.rho - 1.0);
  } else {
    p.rho = uniform(rng, 0.2, 0.9);
    p.gamma = 1.0 + uniform(rng, 0.3, 3.0) * (1.0 - p.rho);
  }
  return p;
}

struct Instance {
  std::shared_ptr<ModelSpec> model;
  AggregatorPtr agg;
};

/// Random model plus random parameters for family f.
inline Instance random_instance_shaped(Rng& rng, Fam f, ModelShape shape) {
  Instance inst;
  inst.model = random_model_shaped(rng, shape, 0.5, 2.0, f == Fam::kNarrowFraming);
  switch (f) {
    case Fam::kAdditive:
      inst.agg = std::make_shared<AdditiveAggregator>(AdditiveParams{uniform(rng, 0.5, 0.9), 0.1});
      break;
    case Fam::kEzConvex:
    case Fam::kEzConcave:
    case Fam::kEzThetaAbove:
      inst.agg = std::make_shared<EpsteinZinAggregator>(random_ez(rng, f));
      break;
    case Fam::kRiskSensitive: {
      RiskSensitiveParams p;
      p.beta = uniform(rng, 0.5, 0.9);
      p.theta = uniform(rng, 0.2, 2.0);
      inst.agg = std::make_shared<RiskSensitiveAggregator>(p);
      break;
    }
    case Fam::kAmbiguity:
    case Fam::kAmbiguityUnitEis:
      inst.agg = std::make_shared<AmbiguityAggregator>(
          random_ambiguity(rng, inst.model->n_z(), f == Fam::kAmbiguityUnitEis));
      break;
    case Fam::kNarrowFraming:
      inst.agg = std::make_shared<NarrowFramingAggregator>(random_nf(rng, pick(rng, 0, 1) == 1));
      break;
  }
  inst.agg->validate(*inst.model);
  return inst;
}

inline Instance random_instance(Rng& rng, Fam f, std::size_t max_states = 5,
                                std::size_t max_actions = 3) {
  return random_instance_shaped(rng, f, random_shape(rng, max_states, max_actions));
}

// ---------------------------------------------------------------------------
// Reference evaluators. Each spells out the family's recursion with plain
// loops over z' so that library results can be compared against them.

inline double ref_expect(const ModelSpec& m, StateIndex x, ActionIndex a,
                         const std::vector<double>& v) {
  const std::size_t z = x % m.n_z();
  const std::size_t s = x / m.n_z();
  const std::size_t y = m.successor.empty() ? a : m.successor[s * m.n_a() + a];
  double e = 0.0;
  for (std::size_t zp = 0; zp < m.n_z(); ++zp) e += m.kernel[z * m.n_z() + zp] * v[y * m.n_z() + zp];
  return e;
}

inline double ref_reward(const ModelSpec& m, StateIndex x, ActionIndex a) {
  const std::size_t z = x % m.n_z();
  const std::size_t s = x / m.n_z();
  return m.reward[(s * m.n_a() + a) * m.n_z() + z];
}

inline double ref_additive(const ModelSpec& m, double beta, StateIndex x, ActionIndex a,
                           const std::vector<double>& v) {
  return ref_reward(m, x, a) + beta * ref_expect(m, x, a, v);
}

inline double ref_ez(const ModelSpec& m, const EZParams& p, StateIndex x, ActionIndex a,
                     const std::vector<double>& v) {
  const double theta = (1.0 - p.gamma) / (1.0 - p.rho);
  return std::pow(ref_reward(m, x, a) + p.beta * std::pow(ref_expect(m, x, a, v), 1.0 / theta),
                  theta);
}

inline double ref_rs(const ModelSpec& m, const RiskSensitiveParams& p, StateIndex x, ActionIndex a,
                     const std::vector<double>& v) {
  // Literal exp/log composition of the transformed recursion.
  return std::exp(-p.theta * (ref_reward(m, x, a) -
                              p.beta / p.theta * std::log(ref_expect(m, x, a, v))));
}

inline double ref_ambiguity(const ModelSpec& m, const AmbiguityParams& p, StateIndex x,
                            ActionIndex a, const std::vector<double>& v) {
  const std::size_t nz = m.n_z();
  const std::size_t z = x % nz;
  const std::size_t s = x / nz;
  const std::size_t y = m.successor.empty() ? a : m.successor[s * m.n_a() + a];
  const double xi1 = (1.0 - p.gamma) / (1.0 - p.eta);
  double outer = 0.0;
  for (std::size_t k = 0; k < p.kernels.size(); ++k) {
    double inner = 0.0;
    for (std::size_t zp = 0; zp < nz; ++zp) {
      inner += p.kernels[k][z * nz + zp] * std::pow(v[y * nz + zp], xi1);
    }
    outer += p.mu[z * p.kernels.size() + k] * std::pow(inner, 1.0 / xi1);
  }
  const double r = ref_reward(m, x, a);
  if (p.rho == 1.0) {
    return std::exp((1.0 - p.eta) * (r + p.beta / (1.0 - p.eta) * std::log(outer)));
  }
  const double xi2 = (1.0 - p.eta) / (1.0 - p.rho);
  return std::pow(r + p.beta * std::pow(outer, 1.0 / xi2), xi2);
}

inline double ref_nf(const ModelSpec& m, const NarrowFramingParams& p, StateIndex x,
                     ActionIndex a, const std::vector<double>& v) {
  const std::size_t nz = m.n_z();
  const std::size_t z = x % nz;
  const std::size_t s = x / nz;
  const double b = m.gamble_utility ? (*m.gamble_utility)[(s * m.n_a() + a) * nz + z] : 0.0;
  const double theta = (1.0 - p.gamma) / (1.0 - p.rho);
  const double ce = std::pow(ref_expect(m, x, a, v), 1.0 / (1.0 - p.gamma));
  return std::pow(ref_reward(m, x, a) + p.beta * std::pow(ce + b, 1.0 - p.rho), theta);
}

/// Reference H for any library aggregator, dispatched on its concrete type.
inline double ref_h(const Aggregator& agg, const ModelSpec& m, StateIndex x, ActionIndex a,
                    const std::vector<double>& v) {
  if (auto* p = dynamic_cast<const AdditiveAggregator*>(&agg)) {
    return ref_additive(m, p->params().beta, x, a, v);
  }
  if (auto* p = dynamic_cast<const EpsteinZinAggregator*>(&agg)) return ref_ez(m, p->params(), x, a, v);
  if (auto* p = dynamic_cast<const RiskSensitiveAggregator*>(&agg)) {
    return ref_rs(m, p->params(), x, a, v);
  }
  if (auto* p = dynamic_cast<const AmbiguityAggregator*>(&agg)) {
    return ref_ambiguity(m, p->params(), x, a, v);
  }
  if (auto* p = dynamic_cast<const NarrowFramingAggregator*>(&agg)) {
    return ref_nf(m, p->params(), x, a, v);
  }
  return std::nan("");
}

// ---------------------------------------------------------------------------
// Right-hand sides of the Bellman equations in original utility units, before
// any change of variables. Used to check that transformed fixed points map
// back to solutions of the untransformed problem.

inline double orig_rhs(const Aggregator& agg, const ModelSpec& m, StateIndex x, ActionIndex a,
                       const std::vector<double>& v) {
  const std::size_t nz = m.n_z();
  const std::size_t z = x % nz;
  const std::size_t s = x / nz;
  const std::size_t y = m.successor.empty() ? a : m.successor[s * m.n_a() + a];
  const double r = ref_reward(m, x, a);
  auto expect = [&](const std::vector<double>& row, auto&& f) {
    double e = 0.0;
    for (std::size_t zp = 0; zp < nz; ++zp) e += row[z * nz + zp] * f(v[y * nz + zp]);
    return e;
  };
  if (auto* p = dynamic_cast<const AdditiveAggregator*>(&agg)) {
    return r + p->params().beta * expect(m.kernel, [](double u) { return u; });
  }
  if (auto* q = dynamic_cast<const EpsteinZinAggregator*>(&agg)) {
    const auto& p = q->params();
    const double e = expect(m.kernel, [&](double u) { return std::pow(u, 1.0 - p.gamma); });
    return std::pow(r + p.beta * std::pow(e, (1.0 - p.rho) / (1.0 - p.gamma)), 1.0 / (1.0 - p.rho));
  }
  if (auto* q = dynamic_cast<const RiskSensitiveAggregator*>(&agg)) {
    const auto& p = q->params();
    const double e = expect(m.kernel, [&](double u) { return std::exp(-p.theta * u); });
    return r - p.beta / p.theta * std::log(e);
  }
  if (auto* q = dynamic_cast<const AmbiguityAggregator*>(&agg)) {
    const auto& p = q->params();
    const std::size_t k = p.kernels.size();
    double outer = 0.0;
    if (p.rho == 1.0) {
      for (std::size_t t = 0; t < k; ++t) {
        const double inner =
            expect(p.kernels[t], [&](double u) { return std::exp((1.0 - p.gamma) * u); });
        outer += p.mu[z * k + t] * std::exp((1.0 - p.eta) / (1.0 - p.gamma) * std::log(inner));
      }
      return r + p.beta / (1.0 - p.eta) * std::log(outer);
    }
    for (std::size_t t = 0; t < k; ++t) {
      const double inner = expect(p.kernels[t], [&](double u) { return std::pow(u, 1.0 - p.gamma); });
      outer += p.mu[z * k + t] * std::pow(inner, (1.0 - p.eta) / (1.0 - p.gamma));
    }
    return std::pow(r + p.beta * std::pow(outer, (1.0 - p.rho) / (1.0 - p.eta)),
                    1.0 / (1.0 - p.rho));
  }
  if (auto* q = dynamic_cast<const NarrowFramingAggregator*>(&agg)) {
    const auto& p = q->params();
    const double b = m.gamble_utility ? (*m.gamble_utility)[(s * m.n_a() + a) * nz + z] : 0.0;
    const double e = expect(m.kernel, [&](double u) { return std::pow(u, 1.0 - p.gamma); });
    return std::pow(r + p.beta * std::pow(std::pow(e, 1.0 / (1.0 - p.gamma)) + b, 1.0 - p.rho),
                    1.0 / (1.0 - p.rho));
  }
  return std::nan("");
}

/// Worst relative residual max_x |max_a rhs(x, a, v) - v(x)| / max(1, |v(x)|)
/// of the original-units Bellman equation.
inline double orig_residual(const Aggregator& agg, const ModelSpec& m, const std::vector<double>& v) {
  double worst = 0.0;
  for (StateIndex x = 0; x < m.n_states(); ++x) {
    double best = -std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < m.n_a(); ++a) {
      if (m.feasible[x * m.n_a() + a]) best = std::max(best, orig_rhs(agg, m, x, a, v));
    }
    worst = std::max(worst, std::abs(best - v[x]) / std::max(1.0, std::abs(v[x])));
  }
  return worst;
}

/// Switches the program's residual norm to one relative to the size of the
/// fixed point, so transformed values that are tiny (or huge) converge to
/// full relative precision. The scale comes from a plain Bellman loop run to
/// a loose relative tolerance.
inline void use_relative_norm(DynamicProgram& p) {
  ValueFunction v = p.start_point();
  for (int it = 0; it < 1000000; ++it) {
    ValueFunction next = apply_bellman(p, v).values;
    double rel = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) {
      rel = std::max(rel, std::abs(next[x] - v[x]) / std::abs(next[x]));
    }
    v = std::move(next);
    if (rel < 1e-6) break;
  }
  std::vector<double> w(v.size());
  for (std::size_t x = 0; x < v.size(); ++x) w[x] = v[x] != 0.0 ? std::abs(v[x]) : 1.0;
  p.set_norm_weights(std::move(w));
}

/// max_x |u - v| / |v|
inline double rel_gap(const ValueFunction& u, const ValueFunction& v) {
  double g = 0.0;
  for (std::size_t x = 0; x < v.size(); ++x) {
    g = std::max(g, std::abs(u[x] - v[x]) / std::max(std::abs(v[x]), 1e-300));
  }
  return g;
}

/// Exact sigma-value of an additive program by Gaussian elimination on
/// (I - beta P_sigma) v = r_sigma.
inline std::vector<double> additive_sigma_value(const ModelSpec& m, double beta,
                                                const std::vector<std::size_t>& sigma) {
  const std::size_t n = m.n_states();
  std::vector<double> A(n * n, 0.0), b(n, 0.0);
  const std::size_t nz = m.n_z();
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t s = x / nz;
    const std::size_t z = x % nz;
    const std::size_t a = sigma[x];
    const std::size_t y = m.successor.empty() ? a : m.successor[s * m.n_a() + a];
    A[x * n + x] += 1.0;
    for (std::size_t zp = 0; zp < nz; ++zp) A[x * n + y * nz + zp] -= beta * m.kernel[z * nz + zp];
    b[x] = ref_reward(m, x, a);
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    }
    for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r * n + c] / A[c * n + c];
      for (std::size_t k = 0; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= A[i * n + i];
  return b;
}

/// The two-state example: a0 stays, a1 switches; rewards s0:{0,1}, s1:{2,0}.
inline std::shared_ptr<ModelSpec> two_state_model() {
  auto m = std::make_shared<ModelSpec>();
  m->s_grid = {0.0, 1.0};
  m->z_grid = {0.0};
  m->a_grid = {0.0, 1.0};
  m->successor = {0, 1, 1, 0};
  m->feasible = {1, 1, 1, 1};
  m->kernel = {1.0};
  m->reward = {0.0, 1.0, 2.0, 0.0};
  m->validate();
  return m;
}

/// Constant-reward model over an arbitrary random kernel.
inline std::shared_ptr<ModelSpec> constant_reward_model(Rng& rng, double c, std::size_t n_s = 2,
                                                        std::size_t n_z = 2) {
  auto m = std::make_shared<ModelSpec>();
  for (std::size_t i = 0; i < n_s; ++i) {
    m->s_grid.push_back(static_cast<double>(i));
    m->a_grid.push_back(static_cast<double>(i));
  }
  for (std::size_t i = 0; i < n_z; ++i) m->z_grid.push_back(static_cast<double>(i));
  m->kernel = random_stochastic(rng, n_z, n_z);
  m->feasible.assign(n_s * n_z * n_s, 1);
  m->reward.assign(n_s * n_s * n_z, c);
  m->validate();
  return m;
}


/// Geometric endogenous grid s_i = g^i with kappa = s: even s choose between
/// staying and moving up, odd s must move up. Rewards grow with s.
struct GrowthInstance {
  std::shared_ptr<ModelSpec> model;
  EZParams params;
  std::vector<double> kappa;
  double L = 1.0;
  double M = 2.0;
  double c = 1.0;
  double d = 1.0;
};

inline GrowthInstance growing_grid(std::size_t n_s = 10, double g = 1.05) {
  GrowthInstance out;
  auto m = std::make_shared<ModelSpec>();
  m->z_grid = {-1.0, 1.0};
  m->a_grid = {0.0, 1.0};
  m->kernel = {0.8, 0.2, 0.3, 0.7};
  for (std::size_t i = 0; i < n_s; ++i) {
    const double s = std::pow(g, static_cast<double>(i));
    m->s_grid.push_back(s);
    m->successor.push_back(i);
    m->successor.push_back(std::min(i + 1, n_s - 1));
    for (std::size_t a = 0; a < 2; ++a) {
      for (double z : m->z_grid) m->reward.push_back(s * (1.5 + 0.3 * z - 0.2 * static_cast<double>(a)));
    }
    for (std::size_t z = 0; z < 2; ++z) {
      m->feasible.push_back(i % 2 == 0 ? 1 : 0);
      m->feasible.push_back(1);
      out.kappa.push_back(s);
    }
  }
  m->validate();
  out.model = m;
  out.params.beta = 0.9;
  out.params.rho = 1.5;
  out.params.gamma = 3.0;
  out.c = std::pow(g, out.params.theta());
  return out;
}

}  // namespace recurdp::testing
