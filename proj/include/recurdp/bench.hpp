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
#include <string>
#include <vector>

#include "recurdp/dp_core.hpp"

namespace recurdp {

struct BenchOptions {
  /// Side lengths; each run uses side endogenous x side exogenous states.
  std::vector<std::size_t> sides{10, 50, 100};
  double tol = 1e-8;
  std::size_t max_iter = 100000;
  unsigned threads = 1;
};

struct BenchRow {
  std::string family;
  std::size_t side = 0;
  std::size_t n_states = 0;
  std::size_t iterations = 0;
  bool converged = false;
  double seconds = 0.0;
};

/// Growth-style test model: s and a share a grid, each state may move at most
/// one grid step, z follows a discretized AR(1).
std::shared_ptr<ModelSpec> make_bench_model(std::size_t side);

/// The family roster timed by run_bench, in output order.
std::vector<std::string> bench_families();

AggregatorPtr make_bench_aggregator(const std::string& family, const ModelSpec& model);

std::vector<BenchRow> run_bench(const BenchOptions& options = {});

/// family,side,n_states,iterations,converged,seconds
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace recurdp
