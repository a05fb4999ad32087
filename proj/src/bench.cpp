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

#include "recurdp/bench.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "recurdp/aggregators.hpp"
#include "recurdp/error.hpp"
#include "recurdp/model_io.hpp"

namespace recurdp {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n, lo);
  for (std::size_t i = 1; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace

std::shared_ptr<ModelSpec> make_bench_model(std::size_t side) {
  if (side < 2) throw Error(ErrorCode::kParameter, "bench grids need at least 2 points");
  auto m = std::make_shared<ModelSpec>();
  m->s_grid = linspace(1.0, 2.0, side);
  m->z_grid = linspace(-1.0, 1.0, side);
  m->a_grid = m->s_grid;
  const std::size_t n = side;

  m->kernel.assign(n * n, 0.0);
  const double persistence = 0.8;
  const double spread = 0.3;
  for (std::size_t z = 0; z < n; ++z) {
    double total = 0.0;
    for (std::size_t zp = 0; zp < n; ++zp) {
      const double dev = (m->z_grid[zp] - persistence * m->z_grid[z]) / spread;
      const double w = std::exp(-0.5 * dev * dev);
      m->kernel[z * n + zp] = w;
      total += w;
    }
    for (std::size_t zp = 0; zp < n; ++zp) m->kernel[z * n + zp] /= total;
  }

  m->feasible.assign(n * n * n, 0);
  m->reward.assign(n * n * n, 0.0);
  m->gamble_utility.emplace(n * n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < n; ++a) {
      const bool local = a + 1 >= s && a <= s + 1;
      const double move = std::abs(m->a_grid[a] - m->s_grid[s]);
      for (std::size_t z = 0; z < n; ++z) {
        m->feasible[(s * n + z) * n + a] = local ? 1 : 0;
        const std::size_t i = (s * n + a) * n + z;
        m->reward[i] = 1.0 + 0.25 * m->s_grid[s] + 0.2 * (m->z_grid[z] + 1.0) - 0.5 * move;
        (*m->gamble_utility)[i] = 0.05 * (1.0 + m->z_grid[z] * m->z_grid[z]);
      }
    }
  }
  m->validate();
  return m;
}

std::vector<std::string> bench_families() {
  return {"additive",       "epstein_zin_convex", "epstein_zin_concave", "epstein_zin_theta_above",
          "risk_sensitive", "ambiguity",          "narrow_framing"};
}

AggregatorPtr make_bench_aggregator(const std::string& family, const ModelSpec& model) {
  const double beta = 0.9;
  if (family == "additive") return make_aggregator(AdditiveParams{beta, 0.1});
  if (family == "epstein_zin_convex") return make_aggregator(EZParams{beta, 0.5, 0.75, {}, {}});
  if (family == "epstein_zin_concave") return make_aggregator(EZParams{beta, 0.5, 2.0, {}, {}});
  if (family == "epstein_zin_theta_above") {
    return make_aggregator(EZParams{beta, 1.5, 3.0, {}, {}});
  }
  if (family == "risk_sensitive") return make_aggregator(RiskSensitiveParams{beta, 1.0, {}, {}});
  if (family == "narrow_framing") return make_aggregator(NarrowFramingParams{beta, 0.5, 2.0});
  if (family == "ambiguity") {
    // Two candidate models: the true kernel and one that ignores z.
    const std::size_t nz = model.n_z();
    AmbiguityParams p;
    p.beta = beta;
    p.rho = 0.5;
    p.gamma = 2.0;
    p.eta = 4.0;
    p.theta_labels = {0.0, 1.0};
    p.kernels = {model.kernel, std::vector<double>(nz * nz, 1.0 / static_cast<double>(nz))};
    p.mu.assign(nz * 2, 0.5);
    return make_aggregator(p);
  }
  throw Error(ErrorCode::kParameter, "unknown bench family '" + family + "'");
}

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (const std::string& family : bench_families()) {
    for (std::size_t side : options.sides) {
      std::shared_ptr<const ModelSpec> model = make_bench_model(side);
      AggregatorPtr agg = make_bench_aggregator(family, *model);
      agg->validate(*model);
      DynamicProgram program(model, agg);
      program.set_threads(options.threads);
      BenchRow row;
      row.family = family;
      row.side = side;
      row.n_states = model->n_states();
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SolveReport rep = value_function_iteration(program, {options.tol, options.max_iter});
        row.iterations = rep.iterations;
        row.converged = rep.converged;
      } catch (const NonConvergenceError& e) {
        row.iterations = e.residuals().size();
        row.converged = false;
      }
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "family,side,n_states,iterations,converged,seconds\n";
  for (const BenchRow& r : rows) {
    out += r.family + "," + std::to_string(r.side) + "," + std::to_string(r.n_states) + "," +
           std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," +
           format_double(r.seconds) + "\n";
  }
  return out;
}

}  // namespace recurdp
