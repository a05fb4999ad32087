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

#include "recurdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recurdp/error.hpp"

namespace recurdp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kInvariant: return "invariant violation";
    case ErrorCode::kParameter: return "parameter error";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kFeasibility: return "feasibility error";
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kDirection: return "direction error";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kSearchFailure: return "search failure";
    case ErrorCode::kGuard: return "enumeration guard exceeded";
    case ErrorCode::kAssumption: return "assumption failure";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

namespace {

[[noreturn]] void invariant(const std::string& what) {
  throw Error(ErrorCode::kInvariant, what);
}

TableRange range_over_feasible(const ModelSpec& model, bool gamble) {
  TableRange out;
  bool first = true;
  for (StateIndex x = 0; x < model.n_states(); ++x) {
    for (ActionIndex a = 0; a < model.n_a(); ++a) {
      if (!model.is_feasible(x, a)) continue;
      const double value = gamble ? model.gamble_at(x, a) : model.reward_at(x, a);
      if (first) {
        out.min = out.max = value;
        first = false;
      }
      out.min = std::min(out.min, value);
      out.max = std::max(out.max, value);
      out.max_abs = std::max(out.max_abs, std::abs(value));
    }
  }
  return out;
}

}  // namespace

std::vector<ActionIndex> ModelSpec::feasible_actions(StateIndex x) const {
  std::vector<ActionIndex> actions;
  for (ActionIndex a = 0; a < n_a(); ++a) {
    if (is_feasible(x, a)) actions.push_back(a);
  }
  return actions;
}

double ModelSpec::expect(StateIndex x, ActionIndex a, std::span<const double> v) const noexcept {
  const std::size_t nz = n_z();
  const std::size_t base = next_endogenous(endogenous(x), a) * nz;
  const double* row = kernel.data() + exogenous(x) * nz;
  double sum = 0.0;
  for (std::size_t zp = 0; zp < nz; ++zp) sum += row[zp] * v[base + zp];
  return sum;
}

void validate_stochastic(std::span<const double> table, std::size_t rows, std::size_t cols,
                         const char* name) {
  if (table.size() != rows * cols) {
    invariant(std::string(name) + ": expected " + std::to_string(rows * cols) +
              " entries, got " + std::to_string(table.size()));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = table[r * cols + c];
      if (!std::isfinite(p) || p < 0.0) {
        invariant(std::string(name) + " row " + std::to_string(r) +
                  " has a negative or non-finite entry at column " + std::to_string(c));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      invariant(std::string(name) + " row " + std::to_string(r) + " sums to " +
                std::to_string(sum) + ", not 1");
    }
  }
}

void ModelSpec::validate() const {
  if (s_grid.empty() || z_grid.empty() || a_grid.empty()) {
    invariant("grids: s, z and a grids must be non-empty");
  }
  const std::size_t pairs = n_s() * n_a() * n_z();
  if (feasible.size() != n_states() * n_a()) invariant("feasibility table has the wrong size");
  if (reward.size() != pairs) invariant("reward table must have n_s * n_a * n_z entries");
  if (gamble_utility && gamble_utility->size() != pairs) {
    invariant("gamble_utility table must have n_s * n_a * n_z entries");
  }
  validate_stochastic(kernel, n_z(), n_z(), "kernel");
  if (successor.empty()) {
    if (n_a() != n_s()) {
      invariant("successor table is required unless the action grid has one entry per s");
    }
  } else {
    if (successor.size() != n_s() * n_a()) invariant("successor table must have n_s * n_a entries");
    for (std::size_t i = 0; i < successor.size(); ++i) {
      if (successor[i] >= n_s()) {
        invariant("successor entry " + std::to_string(i) + " is not a valid s index");
      }
    }
  }
  for (StateIndex x = 0; x < n_states(); ++x) {
    bool any = false;
    for (ActionIndex a = 0; a < n_a(); ++a) {
      if (!is_feasible(x, a)) continue;
      any = true;
      if (!std::isfinite(reward_at(x, a))) {
        invariant("reward at state " + std::to_string(x) + ", action " + std::to_string(a) +
                  " is not finite");
      }
      if (gamble_utility) {
        const double b = gamble_at(x, a);
        if (!std::isfinite(b) || b < 0.0) {
          invariant("gamble_utility must be finite and non-negative at state " +
                    std::to_string(x) + ", action " + std::to_string(a));
        }
      }
    }
    if (!any) invariant("state " + std::to_string(x) + " has no feasible action");
  }
}

TableRange reward_range(const ModelSpec& model) { return range_over_feasible(model, false); }

TableRange gamble_range(const ModelSpec& model) { return range_over_feasible(model, true); }

}  // namespace recurdp
