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

#include "recurdp/aggregators.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "recurdp/error.hpp"

namespace recurdp {

namespace {

[[noreturn]] void parameter_error(const std::string& what) {
  throw Error(ErrorCode::kParameter, what);
}

// Large exponents go through exp/log so the intermediate never leaves the
// representable range before the final result does.
double power(double base, double exponent) {
  if (std::abs(exponent) > 20.0) return std::exp(exponent * std::log(base));
  return std::pow(base, exponent);
}

double positive_expectation(const ModelSpec& model, StateIndex x, ActionIndex a,
                            std::span<const double> v, const char* family) {
  const double e = model.expect(x, a, v);
  if (!(e > 0.0)) {
    throw Error(ErrorCode::kDomain, std::string(family) +
                                        ": continuation expectation is not positive at state " +
                                        std::to_string(x));
  }
  return e;
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) parameter_error("beta must lie in (0, 1)");
}

void require_positive_rewards(const ModelSpec& model, const char* family) {
  if (!(reward_range(model).min > 0.0)) {
    throw Error(ErrorCode::kInvariant,
                std::string(family) + " requires strictly positive rewards on feasible pairs");
  }
}

double default_delta(double M) { return 0.05 * std::max(1.0, M); }

void check_nf_params(const NarrowFramingParams& p) {
  check_beta(p.beta);
  const bool case1 = p.rho > 0.0 && p.rho < 1.0 && p.gamma > 1.0;
  const bool case2 = p.rho > 1.0 && p.rho < p.gamma;
  if (!case1 && !case2) parameter_error("narrow framing requires rho < 1 < gamma or 1 < rho < gamma");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// --- additive ---------------------------------------------------------------

AdditiveAggregator::AdditiveAggregator(AdditiveParams params) : params_(params) {
  if (!(params_.beta > 0.0) || params_.beta == 1.0) parameter_error("beta must be positive and not 1");
  if (!(params_.eps_margin > 0.0)) parameter_error("epsilon margin must be positive");
}

double AdditiveAggregator::evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                                    std::span<const double> v) const {
  return model.reward_at(x, a) + params_.beta * model.expect(x, a, v);
}

Bracket AdditiveAggregator::bracket(const ModelSpec& model) const {
  const double M = reward_range(model).max_abs;
  const double b = params_.beta;
  return Bracket::constant(model.n_states(), -M / (1.0 - b), (M + params_.eps_margin) / (1.0 - b),
                           params_.eps_margin, StrictSide::kUpper);
}

std::string AdditiveAggregator::describe() const {
  return "additive(beta=" + fmt(params_.beta) + ")";
}

// --- Epstein-Zin ------------------------------------------------------------

const char* to_string(EzRegime r) noexcept {
  switch (r) {
    case EzRegime::kConvexMax: return "convex-max";
    case EzRegime::kConcaveMin: return "concave-min";
    case EzRegime::kConcaveMinThetaAbove: return "concave-min-theta>1";
  }
  return "unknown";
}

EzRegime classify_ez_regime(double rho, double gamma) {
  if (!(rho > 0.0) || !(gamma > 0.0)) parameter_error("rho and gamma must be positive");
  if (rho == 1.0) {
    parameter_error("rho = 1 is not supported for Epstein-Zin (only the ambiguity family "
                    "handles the rho = 1 limit)");
  }
  if (gamma == 1.0) parameter_error("gamma = 1 is not supported");
  if (rho > gamma) parameter_error("rho < gamma is required (preference for early resolution)");
  if (gamma < 1.0) return EzRegime::kConvexMax;
  if (rho == gamma) parameter_error("rho = gamma > 1 is not covered");
  return rho < 1.0 ? EzRegime::kConcaveMin : EzRegime::kConcaveMinThetaAbove;
}

EpsteinZinAggregator::EpsteinZinAggregator(EZParams params)
    : params_(params),
      regime_(EzRegime::kConvexMax),
      implied_(classify_ez_regime(params.rho, params.gamma)),
      theta_(params.theta()) {
  check_beta(params_.beta);
  regime_ = params_.regime.value_or(implied_);
  if (params_.delta && !(*params_.delta > 0.0)) parameter_error("delta must be positive");
}

Direction EpsteinZinAggregator::direction() const noexcept {
  return regime_ == EzRegime::kConvexMax ? Direction::kMax : Direction::kMin;
}

double EpsteinZinAggregator::evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                                      std::span<const double> v) const {
  const double r = model.reward_at(x, a);
  if (theta_ == 1.0) return r + params_.beta * model.expect(x, a, v);
  const double e = positive_expectation(model, x, a, v, "epstein_zin");
  return power(r + params_.beta * power(e, 1.0 / theta_), theta_);
}

double EpsteinZinAggregator::delta_for(const ModelSpec& model) const {
  if (params_.delta) return *params_.delta;
  const TableRange range = reward_range(model);
  return regime_ == EzRegime::kConcaveMinThetaAbove ? 0.1 * range.min : default_delta(range.max);
}

Bracket EpsteinZinAggregator::bracket(const ModelSpec& model) const {
  const TableRange range = reward_range(model);
  const double m = range.min;
  const double M = range.max;
  const double b = params_.beta;
  const double delta = delta_for(model);
  const double th = theta_;
  const std::size_t n = model.n_states();
  switch (regime_) {
    case EzRegime::kConvexMax: {
      const double top = (M + delta) / (1.0 - b);
      const double w2 = power(top, th);
      return Bracket::constant(n, power(m / (1.0 - b), th), w2, w2 - power(top - delta, th),
                               StrictSide::kUpper);
    }
    case EzRegime::kConcaveMin: {
      const double top = (M + delta) / (1.0 - b);
      const double w1 = power(top, th);
      return Bracket::constant(n, w1, power(m / (1.0 - b), th), power(top - delta, th) - w1,
                               StrictSide::kLower);
    }
    case EzRegime::kConcaveMinThetaAbove: {
      if (!(delta < m)) {
        parameter_error("delta must be smaller than the minimum reward m (delta = " +
                        fmt(delta) + ", m = " + fmt(m) + ")");
      }
      const double bottom = (m - delta) / (1.0 - b);
      const double w1 = power(bottom, th);
      return Bracket::constant(n, w1, power(M / (1.0 - b), th), power(bottom + delta, th) - w1,
                               StrictSide::kLower);
    }
  }
  return {};
}

double EpsteinZinAggregator::to_original(double v_hat) const {
  if (!(v_hat > 0.0)) throw Error(ErrorCode::kDomain, "transformed value must be positive");
  return power(v_hat, 1.0 / (1.0 - params_.gamma));
}

double EpsteinZinAggregator::from_original(double v) const {
  if (!(v > 0.0)) throw Error(ErrorCode::kDomain, "utility value must be positive");
  return power(v, 1.0 - params_.gamma);
}

void EpsteinZinAggregator::validate(const ModelSpec& model) const {
  require_positive_rewards(model, "epstein_zin");
}

std::string EpsteinZinAggregator::describe() const {
  return "epstein_zin(beta=" + fmt(params_.beta) + ", rho=" + fmt(params_.rho) +
         ", gamma=" + fmt(params_.gamma) + ", theta=" + fmt(theta_) + ", regime=" +
         to_string(regime_) + ")";
}

// --- risk sensitive ---------------------------------------------------------

RiskSensitiveAggregator::RiskSensitiveAggregator(RiskSensitiveParams params) : params_(params) {
  check_beta(params_.beta);
  if (!(params_.theta > 0.0)) parameter_error("risk sensitivity theta must be positive");
  if (params_.delta && !(*params_.delta > 0.0)) parameter_error("delta must be positive");
  if (params_.reward_bound && !(*params_.reward_bound >= 0.0)) {
    parameter_error("reward bound must be non-negative");
  }
}

double RiskSensitiveAggregator::evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                                         std::span<const double> v) const {
  const double e = positive_expectation(model, x, a, v, "risk_sensitive");
  return std::exp(-params_.theta * model.reward_at(x, a)) * std::pow(e, params_.beta);
}

Bracket RiskSensitiveAggregator::bracket(const ModelSpec& model) const {
  const double M = params_.reward_bound.value_or(reward_range(model).max_abs);
  const double delta = params_.delta.value_or(default_delta(M));
  const double b = params_.beta;
  const double th = params_.theta;
  const double w1 = std::exp(-th * (M / (1.0 - b) + delta));
  const double w2 = std::exp(th * M / (1.0 - b));
  const double eps = std::exp(-th * (M / (1.0 - b) + b * delta)) - w1;
  return Bracket::constant(model.n_states(), w1, w2, eps, StrictSide::kLower);
}

double RiskSensitiveAggregator::to_original(double v_hat) const {
  if (!(v_hat > 0.0)) throw Error(ErrorCode::kDomain, "transformed value must be positive");
  return -std::log(v_hat) / params_.theta;
}

double RiskSensitiveAggregator::from_original(double v) const {
  return std::exp(-params_.theta * v);
}

std::string RiskSensitiveAggregator::describe() const {
  return "risk_sensitive(beta=" + fmt(params_.beta) + ", theta=" + fmt(params_.theta) + ")";
}

// --- ambiguity --------------------------------------------------------------

double power_mean(std::span<const double> values, std::span<const double> probs, double xi) {
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] == 0.0) continue;
    if (!(values[i] > 0.0)) {
      if (values[i] == 0.0 && xi > 0.0) continue;
      throw Error(ErrorCode::kDomain, "power mean of a non-positive value");
    }
    sum += probs[i] * power(values[i], xi);
  }
  return power(sum, 1.0 / xi);
}

AmbiguityAggregator::AmbiguityAggregator(AmbiguityParams params) : params_(std::move(params)) {
  check_beta(params_.beta);
  const auto& p = params_;
  if (!(p.rho > 0.0 && p.rho <= 1.0 && 1.0 < p.gamma && p.gamma < p.eta)) {
    parameter_error("ambiguity requires 0 < rho <= 1 < gamma < eta");
  }
  if (p.kernels.empty()) parameter_error("ambiguity requires at least one model in Theta");
  if (!p.theta_labels.empty() && p.theta_labels.size() != p.kernels.size()) {
    parameter_error("theta labels and kernels differ in count");
  }
  if (p.delta && !(*p.delta > 0.0)) parameter_error("delta must be positive");
}

void AmbiguityAggregator::validate(const ModelSpec& model) const {
  const std::size_t nz = model.n_z();
  const std::size_t k = params_.kernels.size();
  for (std::size_t i = 0; i < k; ++i) {
    validate_stochastic(params_.kernels[i], nz, nz,
                        ("ambiguity kernel " + std::to_string(i)).c_str());
  }
  validate_stochastic(params_.mu, nz, k, "ambiguity mu");
  if (!params_.limiting()) require_positive_rewards(model, "ambiguity (rho != 1)");
}

double AmbiguityAggregator::certainty_equivalent(const ModelSpec& model, std::size_t k,
                                                 std::size_t z, std::size_t next_s,
                                                 std::span<const double> v) const {
  const std::size_t nz = model.n_z();
  return power_mean(v.subspan(next_s * nz, nz),
                    std::span<const double>(params_.kernels[k].data() + z * nz, nz),
                    params_.xi1());
}

double AmbiguityAggregator::evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                                     std::span<const double> v) const {
  const std::size_t z = model.exogenous(x);
  const std::size_t next_s = model.next_endogenous(model.endogenous(x), a);
  const std::size_t n_models = params_.kernels.size();
  double outer = 0.0;
  for (std::size_t k = 0; k < n_models; ++k) {
    const double weight = params_.mu[z * n_models + k];
    if (weight == 0.0) continue;
    outer += weight * certainty_equivalent(model, k, z, next_s, v);
  }
  if (!(outer > 0.0)) {
    throw Error(ErrorCode::kDomain, "ambiguity: mixed certainty equivalent is not positive");
  }
  const double r = model.reward_at(x, a);
  const double b = params_.beta;
  if (params_.limiting()) return std::exp((1.0 - params_.eta) * r) * std::pow(outer, b);
  const double xi2 = params_.xi2();
  return power(r + b * power(outer, 1.0 / xi2), xi2);
}

Bracket AmbiguityAggregator::bracket(const ModelSpec& model) const {
  const TableRange range = reward_range(model);
  const double b = params_.beta;
  const std::size_t n = model.n_states();
  if (params_.limiting()) {
    const double M = range.max_abs;
    const double delta = params_.delta.value_or(default_delta(M));
    const double c = 1.0 - params_.eta;
    const double w1 = std::exp(c * (M / (1.0 - b) + delta));
    const double w2 = std::exp(-c * M / (1.0 - b));
    const double eps = std::exp(c * (M / (1.0 - b) + b * delta)) - w1;
    return Bracket::constant(n, w1, w2, eps, StrictSide::kLower);
  }
  const double delta = params_.delta.value_or(default_delta(range.max));
  const double xi2 = params_.xi2();
  const double top = (range.max + delta) / (1.0 - b);
  const double w1 = power(top, xi2);
  return Bracket::constant(n, w1, power(range.min / (1.0 - b), xi2), power(top - delta, xi2) - w1,
                           StrictSide::kLower);
}

double AmbiguityAggregator::to_original(double v_hat) const {
  if (!(v_hat > 0.0)) throw Error(ErrorCode::kDomain, "transformed value must be positive");
  if (params_.limiting()) return std::log(v_hat) / (1.0 - params_.eta);
  return power(v_hat, 1.0 / (1.0 - params_.eta));
}

double AmbiguityAggregator::from_original(double v) const {
  if (params_.limiting()) return std::exp((1.0 - params_.eta) * v);
  if (!(v > 0.0)) throw Error(ErrorCode::kDomain, "utility value must be positive");
  return power(v, 1.0 - params_.eta);
}

std::string AmbiguityAggregator::describe() const {
  return "ambiguity(beta=" + fmt(params_.beta) + ", rho=" + fmt(params_.rho) +
         ", gamma=" + fmt(params_.gamma) + ", eta=" + fmt(params_.eta) +
         ", models=" + std::to_string(params_.kernels.size()) + ")";
}

// --- narrow framing ---------------------------------------------------------

NarrowFramingAggregator::NarrowFramingAggregator(NarrowFramingParams params) : params_(params) {
  check_nf_params(params_);
}

double NarrowFramingAggregator::evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                                         std::span<const double> v) const {
  const double e = positive_expectation(model, x, a, v, "narrow_framing");
  const double ce = power(e, 1.0 / (1.0 - params_.gamma));
  const double inner = power(ce + model.gamble_at(x, a), 1.0 - params_.rho);
  return power(model.reward_at(x, a) + params_.beta * inner, params_.theta());
}

Bracket NarrowFramingAggregator::bracket(const ModelSpec& model) const {
  return find_nf_lower_solution(params_, model).bracket;
}

double NarrowFramingAggregator::to_original(double v_hat) const {
  if (!(v_hat > 0.0)) throw Error(ErrorCode::kDomain, "transformed value must be positive");
  return power(v_hat, 1.0 / (1.0 - params_.gamma));
}

double NarrowFramingAggregator::from_original(double v) const {
  if (!(v > 0.0)) throw Error(ErrorCode::kDomain, "utility value must be positive");
  return power(v, 1.0 - params_.gamma);
}

void NarrowFramingAggregator::validate(const ModelSpec& model) const {
  require_positive_rewards(model, "narrow_framing");
}

std::string NarrowFramingAggregator::describe() const {
  return "narrow_framing(beta=" + fmt(params_.beta) + ", rho=" + fmt(params_.rho) +
         ", gamma=" + fmt(params_.gamma) + ", theta=" + fmt(params_.theta()) + ")";
}

double nf_phi(const NarrowFramingParams& params, double K, double L, double d) {
  const double one_minus_rho = 1.0 - params.rho;
  const double base = (std::pow(d, one_minus_rho) - K) / params.beta;
  if (!(d > 0.0) || !(base > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::pow(base, 1.0 / one_minus_rho) - d - L;
}

NfLowerSolution find_nf_lower_solution(const NarrowFramingParams& params,
                                       const ModelSpec& model) {
  check_nf_params(params);
  NfLowerSolution out;
  const TableRange r = reward_range(model);
  const TableRange g = gamble_range(model);
  if (!(r.min > 0.0)) {
    throw Error(ErrorCode::kInvariant, "narrow_framing requires strictly positive rewards");
  }
  out.m = r.min;
  out.M = r.max;
  out.l = model.gamble_utility ? g.min : 0.0;
  out.L = model.gamble_utility ? g.max : 0.0;

  const double beta = params.beta;
  const double rho = params.rho;
  const double theta = params.theta();
  const double one_minus_rho = 1.0 - rho;
  const double shrink = 1.0 - std::pow(beta, 1.0 / rho);
  out.regime = rho < 1.0 ? NfCase::kRhoBelowOne : NfCase::kRhoAboveOne;
  // K is the reward bound that makes H(w1) smallest; the other bound sets w2.
  const bool below = out.regime == NfCase::kRhoBelowOne;
  const double K = below ? out.M : out.m;
  const double w2 = power((below ? out.m : out.M) / shrink, theta);
  out.d_lower = std::pow(K / shrink, 1.0 / one_minus_rho);

  // The gap is relative to d: near a large root an absolute 1e-8 is below
  // roundoff and the resulting epsilon can vanish.
  auto clears = [](double d, double value) { return value > 1e-8 * std::max(1.0, d); };
  constexpr std::size_t kMaxScan = 1000000;
  auto phi = [&](double d) { return nf_phi(params, K, out.L, d); };

  double lo = out.d_lower;
  double hi = 0.0;
  bool found = false;
  if (below) {
    double step = out.d_lower;
    for (std::size_t k = 0; k < kMaxScan && std::isfinite(step); ++k, step *= 2.0) {
      const double d = out.d_lower + step;
      if (clears(d, phi(d))) {
        hi = d;
        found = true;
        break;
      }
      lo = d;
    }
  } else {
    // phi blows up as d approaches m^(1/(1-rho)) from below, so the scan
    // halves the remaining gap to that cap instead of doubling outward.
    const double cap = std::pow(out.m, 1.0 / one_minus_rho);
    double gap = cap - out.d_lower;
    for (std::size_t k = 0; k < kMaxScan && gap > 0.0; ++k) {
      gap *= 0.5;
      const double d = cap - gap;
      if (!(d < cap)) break;
      if (clears(d, phi(d))) {
        hi = d;
        found = true;
        break;
      }
      lo = d;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kSearchFailure, "narrow framing: no d with phi(d) > 0 was found");
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (clears(mid, phi(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.d_star = hi;
  out.phi_at_star = phi(hi);

  const double w1 = power(out.d_star, 1.0 - params.gamma);
  const double lower_image =
      power(K + beta * power(out.d_star + out.L, one_minus_rho), theta);
  const double eps = lower_image - w1;
  if (!(w1 < w2) || !(eps > 0.0)) {
    throw Error(ErrorCode::kSearchFailure, "narrow framing: root search produced an invalid bracket");
  }
  out.bracket = Bracket::constant(model.n_states(), w1, w2, eps, StrictSide::kLower);
  return out;
}

}  // namespace recurdp
