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
#include <optional>
#include <span>
#include <vector>

namespace recurdp {

/// Flat index of a state x = (s, z), laid out as s * n_z + z.
using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Primitives of a finite decision problem with an exogenous Markov shock.
///
/// A state is a pair (s, z) of an endogenous index into `s_grid` and an
/// exogenous index into `z_grid`. Choosing action `a` at (s, z) moves the
/// endogenous state to `successor(s, a)` while z evolves by `kernel`.
/// Tables are stored flat and row-major:
///
///   feasible[x * n_a + a]             (x = s * n_z + z)
///   kernel[z * n_z + z']
///   reward[(s * n_a + a) * n_z + z]
///   gamble_utility[(s * n_a + a) * n_z + z]
///   successor[s * n_a + a]            (empty means successor(s, a) = a)
struct ModelSpec {
  std::vector<double> s_grid;
  std::vector<double> z_grid;
  std::vector<double> a_grid;
  std::vector<unsigned char> feasible;
  std::vector<double> kernel;
  std::vector<double> reward;
  std::optional<std::vector<double>> gamble_utility;
  std::vector<std::size_t> successor;

  std::size_t n_s() const noexcept { return s_grid.size(); }
  std::size_t n_z() const noexcept { return z_grid.size(); }
  std::size_t n_a() const noexcept { return a_grid.size(); }
  std::size_t n_states() const noexcept { return n_s() * n_z(); }

  StateIndex state_index(std::size_t s, std::size_t z) const noexcept {
    return s * n_z() + z;
  }
  std::size_t endogenous(StateIndex x) const noexcept { return x / n_z(); }
  std::size_t exogenous(StateIndex x) const noexcept { return x % n_z(); }

  bool is_feasible(StateIndex x, ActionIndex a) const noexcept {
    return feasible[x * n_a() + a] != 0;
  }
  std::size_t next_endogenous(std::size_t s, ActionIndex a) const noexcept {
    return successor.empty() ? a : successor[s * n_a() + a];
  }
  double reward_at(StateIndex x, ActionIndex a) const noexcept {
    return reward[(endogenous(x) * n_a() + a) * n_z() + exogenous(x)];
  }
  double gamble_at(StateIndex x, ActionIndex a) const noexcept {
    return gamble_utility ? (*gamble_utility)[(endogenous(x) * n_a() + a) * n_z() + exogenous(x)]
                          : 0.0;
  }
  std::span<const double> kernel_row(std::size_t z) const noexcept {
    return {kernel.data() + z * n_z(), n_z()};
  }

  /// Feasible actions at x in increasing index order.
  std::vector<ActionIndex> feasible_actions(StateIndex x) const;

  /// Checks table shapes, kernel stochasticity (1e-12), feasibility and
  /// successor ranges. Throws Error(kInvariant) naming the violated constraint.
  void validate() const;

  /// Expectation of v(successor(s, a), z') under kernel row z.
  double expect(StateIndex x, ActionIndex a, std::span<const double> v) const noexcept;
};

/// Extremes of a per-pair table over the feasible set G.
struct TableRange {
  double min = 0.0;
  double max = 0.0;
  double max_abs = 0.0;
};

TableRange reward_range(const ModelSpec& model);
TableRange gamble_range(const ModelSpec& model);

/// Throws Error(kInvariant) unless `table` is row-stochastic within 1e-12.
void validate_stochastic(std::span<const double> table, std::size_t rows, std::size_t cols,
                         const char* name);

}  // namespace recurdp
