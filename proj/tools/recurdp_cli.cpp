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

// recurdp: solve, check, oracle and bench over model files.
//
// Exit codes: 0 success, 1 I/O or internal failure, 2 model/usage parse
// failure, 3 assumption failure, 4 non-convergence, 5 enumeration guard,
// 6 oracle and VFI disagree.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recurdp/recurdp.h"

namespace {

enum Exit {
  kExitOk = 0,
  kExitIo = 1,
  kExitParse = 2,
  kExitAssumption = 3,
  kExitNonConvergence = 4,
  kExitGuard = 5,
  kExitMismatch = 6,
};

constexpr double kOracleGapTol = 1e-8;

struct Invocation {
  std::string model;
  std::string out;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  bool force = false;
};

struct ProblemDeleter {
  void operator()(recurdp_problem* p) const { recurdp_problem_free(p); }
};
struct CheckDeleter {
  void operator()(recurdp_check* c) const { recurdp_check_free(c); }
};
struct ReportDeleter {
  void operator()(recurdp_report* r) const { recurdp_report_free(r); }
};
struct OracleDeleter {
  void operator()(recurdp_oracle* o) const { recurdp_oracle_free(o); }
};
struct BenchDeleter {
  void operator()(recurdp_bench* b) const { recurdp_bench_free(b); }
};

using Problem = std::unique_ptr<recurdp_problem, ProblemDeleter>;

int exit_for(int status) {
  switch (status) {
    case RECURDP_OK: return kExitOk;
    case RECURDP_E_PARSE:
    case RECURDP_E_INVARIANT:
    case RECURDP_E_PARAMETER:
    case RECURDP_E_SHAPE: return kExitParse;
    case RECURDP_E_ASSUMPTION:
    case RECURDP_E_DOMAIN:
    case RECURDP_E_SEARCH_FAILURE: return kExitAssumption;
    case RECURDP_E_NONCONVERGENCE: return kExitNonConvergence;
    case RECURDP_E_GUARD: return kExitGuard;
    default: return kExitIo;
  }
}

int report_error(int status, const char* stage) {
  std::fprintf(stderr, "error: %s: %s: %s\n", stage, recurdp_status_name(status),
               recurdp_last_error());
  return exit_for(status);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Loads the model and applies command-line overrides. Returns an exit code.
int open_problem(const Invocation& inv, Problem& out) {
  recurdp_problem* raw = nullptr;
  int st = recurdp_problem_load(inv.model.c_str(), &raw);
  if (st != RECURDP_OK) return report_error(st, "load");
  Problem p(raw);
  if (inv.tol && (st = recurdp_problem_set_tol(p.get(), *inv.tol)) != RECURDP_OK) {
    return report_error(RECURDP_E_PARAMETER, "--tol");
  }
  if (inv.max_iter && (st = recurdp_problem_set_max_iter(p.get(), *inv.max_iter)) != RECURDP_OK) {
    return report_error(RECURDP_E_PARAMETER, "--max-iter");
  }
  if (inv.seed) recurdp_problem_set_seed(p.get(), *inv.seed);
  if (inv.delta && (st = recurdp_problem_set_delta(p.get(), *inv.delta)) != RECURDP_OK) {
    return report_error(st == RECURDP_E_INVALID_ARGUMENT ? RECURDP_E_PARAMETER : st, "--delta");
  }
  out = std::move(p);
  return kExitOk;
}

// Runs the assumption check, prints it, and returns kExitOk iff it passed.
int run_check(const recurdp_problem* p, bool quiet_on_pass) {
  recurdp_check* raw = nullptr;
  const int st = recurdp_check_run(p, &raw);
  if (st != RECURDP_OK) return report_error(st, "check");
  std::unique_ptr<recurdp_check, CheckDeleter> check(raw);
  const bool passed = recurdp_check_passed(check.get()) != 0;
  if (!passed || !quiet_on_pass) std::fputs(recurdp_check_text(check.get()), stdout);
  if (!passed) {
    for (std::size_t i = 0; i < recurdp_check_failure_count(check.get()); ++i) {
      std::fprintf(stderr, "assumption failure: %s\n", recurdp_check_failure(check.get(), i));
    }
    return kExitAssumption;
  }
  return kExitOk;
}

void print_residuals(const recurdp_report* r) {
  std::vector<double> res(recurdp_report_residuals(r, nullptr, 0));
  recurdp_report_residuals(r, res.data(), res.size());
  const std::size_t shown = std::min<std::size_t>(res.size(), 20);
  std::printf("residuals (last %zu of %zu):\n", shown, res.size());
  for (std::size_t i = res.size() - shown; i < res.size(); ++i) {
    std::printf("  %zu %s\n", i + 1, fmt(res[i]).c_str());
  }
}

int cmd_solve(const Invocation& inv) {
  Problem p;
  if (int code = open_problem(inv, p); code != kExitOk) return code;
  if (int code = run_check(p.get(), true); code != kExitOk) {
    if (!inv.force) {
      std::fprintf(stderr, "refusing to solve: assumption check failed (use --force)\n");
      return code;
    }
    std::fprintf(stderr, "warning: assumption check failed, continuing because of --force\n");
  }
  recurdp_report* raw = nullptr;
  const int st = recurdp_solve(p.get(), &raw);
  std::unique_ptr<recurdp_report, ReportDeleter> report(raw);
  if (st == RECURDP_E_NONCONVERGENCE) {
    std::fprintf(stderr, "error: solve: %s\n", recurdp_last_error());
    print_residuals(report.get());
    return kExitNonConvergence;
  }
  if (st != RECURDP_OK) return report_error(st, "solve");

  recurdp_problem_info info{};
  recurdp_problem_info_get(p.get(), &info);
  const std::size_t n = recurdp_report_n_states(report.get());
  std::vector<double> v(n), vo(n);
  std::vector<std::size_t> pol(n);
  recurdp_report_values(report.get(), v.data(), n);
  recurdp_report_values_original(report.get(), vo.data(), n);
  recurdp_report_policy(report.get(), pol.data(), n);
  std::printf("family: %s (%s program), %zu states\n", info.family,
              info.minimize ? "min" : "max", n);
  std::printf("converged in %zu iterations, contraction estimate %s\n",
              recurdp_report_iterations(report.get()),
              fmt(recurdp_report_contraction(report.get())).c_str());
  const std::size_t shown = std::min<std::size_t>(n, 50);
  std::printf("state,s_index,z_index,v_transformed,v_original_units,action_index\n");
  for (std::size_t x = 0; x < shown; ++x) {
    std::printf("%zu,%zu,%zu,%s,%s,%zu\n", x, x / info.n_z, x % info.n_z, fmt(v[x]).c_str(),
                fmt(vo[x]).c_str(), pol[x]);
  }
  if (shown < n) std::printf("... %zu more states in values.csv\n", n - shown);
  if (!inv.out.empty()) {
    if (int e = recurdp_report_export(p.get(), report.get(), inv.out.c_str()); e != RECURDP_OK) {
      return report_error(e, "export");
    }
    std::printf("wrote values.csv, policy.csv, diagnostics.csv to %s\n", inv.out.c_str());
  }
  return kExitOk;
}

int cmd_check(const Invocation& inv) {
  Problem p;
  if (int code = open_problem(inv, p); code != kExitOk) return code;
  return run_check(p.get(), false);
}

int cmd_oracle(const Invocation& inv) {
  Problem p;
  if (int code = open_problem(inv, p); code != kExitOk) return code;
  recurdp_oracle* oraw = nullptr;
  int st = recurdp_oracle_run(p.get(), &oraw);
  if (st != RECURDP_OK) return report_error(st, "oracle");
  std::unique_ptr<recurdp_oracle, OracleDeleter> oracle(oraw);
  recurdp_report* rraw = nullptr;
  st = recurdp_solve(p.get(), &rraw);
  std::unique_ptr<recurdp_report, ReportDeleter> report(rraw);
  if (st != RECURDP_OK) return report_error(st, "solve");

  recurdp_problem_info info{};
  recurdp_problem_info_get(p.get(), &info);
  const std::size_t n = info.n_states;
  std::vector<double> vo(n), vf(n), w(n, 1.0);
  std::vector<std::size_t> po(n), pf(n);
  recurdp_oracle_values(oracle.get(), vo.data(), n);
  recurdp_oracle_policy(oracle.get(), po.data(), n);
  recurdp_report_values(report.get(), vf.data(), n);
  recurdp_report_policy(report.get(), pf.data(), n);
  const bool weighted = recurdp_problem_norm_weights(p.get(), w.data(), n) == n;
  double gap = 0.0;
  double wgap = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    gap = std::max(gap, std::abs(vo[x] - vf[x]));
    wgap = std::max(wgap, std::abs(vo[x] - vf[x]) / w[x]);
  }
  std::printf("policies enumerated: %zu\n", recurdp_oracle_policies(oracle.get()));
  std::printf("oracle takes the pointwise %s over policies\n", info.minimize ? "inf" : "sup");
  std::printf("state,oracle_value,vfi_value,oracle_action,vfi_action\n");
  for (std::size_t x = 0; x < std::min<std::size_t>(n, 50); ++x) {
    std::printf("%zu,%s,%s,%zu,%zu\n", x, fmt(vo[x]).c_str(), fmt(vf[x]).c_str(), po[x], pf[x]);
  }
  std::printf("sup-norm gap: %s\n", fmt(gap).c_str());
  if (weighted) std::printf("weighted-norm gap: %s\n", fmt(wgap).c_str());
  const double decisive = weighted ? wgap : gap;
  if (!(decisive <= kOracleGapTol)) {
    std::fprintf(stderr, "oracle and VFI disagree: gap %s exceeds %s\n", fmt(decisive).c_str(),
                 fmt(kOracleGapTol).c_str());
    return kExitMismatch;
  }
  std::printf("agreement within %s\n", fmt(kOracleGapTol).c_str());
  return kExitOk;
}

int cmd_bench(const Invocation& inv) {
  recurdp_bench* raw = nullptr;
  const int st = recurdp_bench_run(0, &raw);
  if (st != RECURDP_OK) return report_error(st, "bench");
  std::unique_ptr<recurdp_bench, BenchDeleter> bench(raw);
  const char* csv = recurdp_bench_csv(bench.get());
  std::fputs(csv, stdout);
  const std::filesystem::path dir = inv.out.empty() ? "." : inv.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream file(dir / "bench.csv", std::ios::binary | std::ios::trunc);
  file << csv;
  if (ec || !file) {
    std::fprintf(stderr, "error: cannot write %s\n", (dir / "bench.csv").string().c_str());
    return kExitIo;
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, Invocation& inv, bool needs_model) {
  auto* model = cmd->add_option("--model", inv.model, "Model file (JSON)");
  if (needs_model) model->required()->check(CLI::ExistingFile);
  cmd->add_option("--tol", inv.tol, "Residual tolerance");
  cmd->add_option("--max-iter", inv.max_iter, "Iteration cap");
  cmd->add_option("--seed", inv.seed, "Seed for assumption sampling");
  cmd->add_option("--delta", inv.delta, "Bracket slack override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recurdp: dynamic programs with recursive preferences"};
  app.set_version_flag("--version", recurdp_version());
  app.require_subcommand(1);
  Invocation inv;

  auto* solve = app.add_subcommand("solve", "Check assumptions, run VFI, export CSV tables");
  add_common(solve, inv, true);
  solve->add_option("--out", inv.out, "Output directory for values/policy/diagnostics CSV");
  solve->add_flag("--force", inv.force, "Solve even when the assumption check fails");

  auto* check = app.add_subcommand("check", "Print the assumption report");
  add_common(check, inv, true);
  check->add_option("--out", inv.out, "Unused; accepted for symmetry");

  auto* oracle = app.add_subcommand("oracle", "Compare VFI with brute-force policy enumeration");
  add_common(oracle, inv, true);
  oracle->add_option("--out", inv.out, "Unused; accepted for symmetry");

  auto* bench = app.add_subcommand("bench", "Time VFI over the built-in size ladder");
  bench->add_option("--out", inv.out, "Directory for bench.csv (default: current directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  if (*solve) return cmd_solve(inv);
  if (*check) return cmd_check(inv);
  if (*oracle) return cmd_oracle(inv);
  return cmd_bench(inv);
}
