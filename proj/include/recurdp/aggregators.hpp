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
#include <span>
#include <string>
#include <vector>

#include "recurdp/dp_core.hpp"

namespace recurdp {

// ---------------------------------------------------------------------------
// Additively separable rewards: H = F + beta * E[v].
// ---------------------------------------------------------------------------

struct AdditiveParams {
  double beta = 0.9;
  double eps_margin = 0.1;
};

/// Maximizing. Bracket: w1 = -M/(1-beta), w2 = (M+eps)/(1-beta), M = max |F|.
/// beta >= 1 is accepted so that the assumption checker can reject it.
class AdditiveAggregator final : public Aggregator {
 public:
  explicit AdditiveAggregator(AdditiveParams params);

  const AdditiveParams& params() const noexcept { return params_; }

  Family family() const noexcept override { return Family::kAdditive; }
  Direction direction() const noexcept override { return Direction::kMax; }
  double evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                  std::span<const double> v) const override;
  Bracket bracket(const ModelSpec& model) const override;
  double to_original(double v_hat) const override { return v_hat; }
  double from_original(double v) const override { return v; }
  std::string describe() const override;

 private:
  AdditiveParams params_;
};

// ---------------------------------------------------------------------------
// Epstein-Zin in the transformed space v_hat = v^(1-gamma):
//   H = { r + beta * E[v_hat]^(1/theta) }^theta,  theta = (1-gamma)/(1-rho).
// ---------------------------------------------------------------------------

enum class EzRegime {
  kConvexMax,             // rho <= gamma < 1, theta in (0, 1]
  kConcaveMin,            // rho < 1 < gamma, theta < 0
  kConcaveMinThetaAbove,  // 1 < rho < gamma, theta > 1
};

const char* to_string(EzRegime r) noexcept;

/// Regime implied by (rho, gamma). Throws Error(kParameter) for rho == 1,
/// gamma == 1, rho > gamma, or rho == gamma > 1.
EzRegime classify_ez_regime(double rho, double gamma);

struct EZParams {
  double beta = 0.9;
  double rho = 0.5;
  double gamma = 2.0;
  /// Bracket slack; defaults to 0.1 m when theta > 1, else 0.05 max(1, M).
  std::optional<double> delta;
  /// Declared regime. When set it drives direction and bracket even if it
  /// disagrees with (rho, gamma), so that a mislabeled file is caught by the
  /// assumption checker rather than silently corrected.
  std::optional<EzRegime> regime;

  double theta() const noexcept { return (1.0 - gamma) / (1.0 - rho); }
};

class EpsteinZinAggregator final : public Aggregator {
 public:
  explicit EpsteinZinAggregator(EZParams params);

  const EZParams& params() const noexcept { return params_; }
  EzRegime regime() const noexcept { return regime_; }
  bool regime_consistent() const noexcept { return regime_ == implied_; }
  double theta() const noexcept { return theta_; }

  Family family() const noexcept override { return Family::kEpsteinZin; }
  Direction direction() const noexcept override;
  double evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                  std::span<const double> v) const override;
  Bracket bracket(const ModelSpec& model) const override;
  double to_original(double v_hat) const override;
  double from_original(double v) const override;
  void validate(const ModelSpec& model) const override;
  std::string describe() const override;

  /// delta actually used for `model` (explicit or default).
  double delta_for(const ModelSpec& model) const;

 private:
  EZParams params_;
  EzRegime regime_;
  EzRegime implied_;
  double theta_;
};

// ---------------------------------------------------------------------------
// Risk-sensitive preferences in v_hat = exp(-theta v):
//   H = exp(-theta r) * E[v_hat]^beta   (minimizing).
// ---------------------------------------------------------------------------

struct RiskSensitiveParams {
  double beta = 0.9;
  double theta = 1.0;
  std::optional<double> delta;
  /// Bound M on |r|; computed from the model when absent.
  std::optional<double> reward_bound;
};

class RiskSensitiveAggregator final : public Aggregator {
 public:
  explicit RiskSensitiveAggregator(RiskSensitiveParams params);

  const RiskSensitiveParams& params() const noexcept { return params_; }

  Family family() const noexcept override { return Family::kRiskSensitive; }
  Direction direction() const noexcept override { return Direction::kMin; }
  double evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                  std::span<const double> v) const override;
  Bracket bracket(const ModelSpec& model) const override;
  double to_original(double v_hat) const override;
  double from_original(double v) const override;
  std::string describe() const override;

 private:
  RiskSensitiveParams params_;
};

// ---------------------------------------------------------------------------
// Smooth ambiguity in v_hat = v^(1-eta) (rho != 1) or exp((1-eta) v) (rho = 1).
// ---------------------------------------------------------------------------

struct AmbiguityParams {
  double beta = 0.9;
  double rho = 0.66;
  double gamma = 2.0;
  double eta = 8.86;
  std::vector<double> theta_labels;
  /// One row-stochastic n_z x n_z table per model in theta_labels.
  std::vector<std::vector<double>> kernels;
  /// n_z x |Theta| row-stochastic prior over models, per exogenous state.
  std::vector<double> mu;
  std::optional<double> delta;

  double xi1() const noexcept { return (1.0 - gamma) / (1.0 - eta); }
  double xi2() const noexcept { return (1.0 - eta) / (1.0 - rho); }
  bool limiting() const noexcept { return rho == 1.0; }
};

/// Power mean [sum_i p_i u_i^xi]^(1/xi) of positive values.
double power_mean(std::span<const double> values, std::span<const double> probs, double xi);

class AmbiguityAggregator final : public Aggregator {
 public:
  explicit AmbiguityAggregator(AmbiguityParams params);

  const AmbiguityParams& params() const noexcept { return params_; }

  /// Inner certainty equivalent R_theta v at (next s, z) under model k.
  double certainty_equivalent(const ModelSpec& model, std::size_t k, std::size_t z,
                              std::size_t next_s, std::span<const double> v) const;

  Family family() const noexcept override { return Family::kAmbiguity; }
  Direction direction() const noexcept override { return Direction::kMin; }
  double evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                  std::span<const double> v) const override;
  Bracket bracket(const ModelSpec& model) const override;
  double to_original(double v_hat) const override;
  double from_original(double v) const override;
  void validate(const ModelSpec& model) const override;
  std::string describe() const override;

 private:
  AmbiguityParams params_;
};

// ---------------------------------------------------------------------------
// Narrow framing in v_hat = v^(1-gamma):
//   H = { r + beta [ E[v_hat]^(1/(1-gamma)) + B ]^(1-rho) }^theta.
// ---------------------------------------------------------------------------

struct NarrowFramingParams {
  double beta = 0.9;
  double rho = 0.5;
  double gamma = 2.0;

  double theta() const noexcept { return (1.0 - gamma) / (1.0 - rho); }
};

enum class NfCase { kRhoBelowOne, kRhoAboveOne };

/// Strict lower solution found by scanning the root function
///   phi(d) = ((d^(1-rho) - K)/beta)^(1/(1-rho)) - d - L
/// upward from d_lower, with K = M when rho < 1 and K = m when rho > 1.
struct NfLowerSolution {
  NfCase regime = NfCase::kRhoBelowOne;
  double m = 0.0;
  double M = 0.0;
  double l = 0.0;
  double L = 0.0;
  double d_lower = 0.0;
  double d_star = 0.0;
  double phi_at_star = 0.0;
  Bracket bracket;
};

/// phi(d) for the given case constants; -infinity outside its domain.
double nf_phi(const NarrowFramingParams& params, double K, double L, double d);

NfLowerSolution find_nf_lower_solution(const NarrowFramingParams& params,
                                       const ModelSpec& model);

class NarrowFramingAggregator final : public Aggregator {
 public:
  explicit NarrowFramingAggregator(NarrowFramingParams params);

  const NarrowFramingParams& params() const noexcept { return params_; }

  Family family() const noexcept override { return Family::kNarrowFraming; }
  Direction direction() const noexcept override { return Direction::kMin; }
  double evaluate(const ModelSpec& model, StateIndex x, ActionIndex a,
                  std::span<const double> v) const override;
  Bracket bracket(const ModelSpec& model) const override;
  double to_original(double v_hat) const override;
  double from_original(double v) const override;
  void validate(const ModelSpec& model) const override;
  std::string describe() const override;

 private:
  NarrowFramingParams params_;
};

}  // namespace recurdp
