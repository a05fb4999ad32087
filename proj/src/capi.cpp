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

#include "recurdp/recurdp.h"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "recurdp/bench.hpp"
#include "recurdp/error.hpp"
#include "recurdp/model_io.hpp"
#include "recurdp/unbounded.hpp"
#include "recurdp/verify.hpp"

using namespace recurdp;

struct recurdp_problem {
  LoadedModel loaded;
  AggregatorPtr agg;
  std::optional<WeightSpec> weight;
  unsigned threads = default_threads();
};

struct recurdp_check {
  AssumptionReport report;
  std::optional<WeightReport> weights;
  std::vector<std::string> failures;
  std::string text;
};

struct recurdp_report {
  SolveReport report;
  std::vector<double> original;
  double seconds = 0.0;
};

struct recurdp_oracle {
  OracleResult result;
};

struct recurdp_bench {
  std::vector<BenchRow> rows;
  std::string csv;
};

namespace {

thread_local std::string g_last_error;

int fail(int status, const std::string& message) {
  g_last_error = message;
  return status;
}

int status_of(ErrorCode code) { return static_cast<int>(code) + 1; }

template <typename F>
int guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RECURDP_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RECURDP_E_INTERNAL, e.what());
  } catch (...) {
    return fail(RECURDP_E_INTERNAL, "unknown failure");
  }
}

#define RECURDP_REQUIRE(cond, what) \
  if (!(cond)) return fail(RECURDP_E_INVALID_ARGUMENT, what)

// Applies solver-block overrides to the family and weight parameters.
void rebuild(recurdp_problem& p) {
  FamilyParams effective = p.loaded.family;
  p.weight = p.loaded.weight;
  if (p.loaded.solver.delta) {
    override_delta(effective, *p.loaded.solver.delta);
    if (p.weight) p.weight->delta = *p.loaded.solver.delta;
  }
  AggregatorPtr agg = make_aggregator(effective);
  agg->validate(*p.loaded.model);
  p.agg = std::move(agg);
}

DynamicProgram build_program(const recurdp_problem& p) {
  if (p.weight) {
    const auto& ez = dynamic_cast<const EpsteinZinAggregator&>(*p.agg);
    DynamicProgram program = weighted_program(p.loaded.model, ez.params(), *p.weight);
    program.set_threads(p.threads);
    return program;
  }
  DynamicProgram program(p.loaded.model, p.agg);
  program.set_threads(p.threads);
  return program;
}

std::string ok_text(bool ok) { return ok ? "ok" : "FAIL"; }

std::string render_check(const recurdp_problem& p, const recurdp_check& c) {
  const AssumptionReport& r = c.report;
  const bool max = p.agg->direction() == Direction::kMax;
  std::ostringstream os;
  os << "family:           " << p.agg->describe() << " [" << (max ? "max" : "min")
     << " program]\n";
  os << "states:           " << p.loaded.model->n_states() << "\n";
  os << "samples:          " << r.samples_used << " (seed " << p.loaded.solver.seed << ")\n";
  os << "monotonicity:     " << ok_text(r.monotone_ok) << "\n";
  os << "value shape:      " << ok_text(r.shape_ok) << " (" << (max ? "convex" : "concave")
     << ")\n";
  os << "lower solution:   " << ok_text(r.lower_bound_ok) << "\n";
  os << "upper solution:   " << ok_text(r.upper_bound_ok) << "\n";
  os << "strict margin:    " << ok_text(r.strict_margin_ok) << " (side "
     << (build_program(p).bracket().strict_side == StrictSide::kUpper ? "upper" : "lower")
     << ")\n";
  os << "worst violation:  " << format_double(r.worst_violation) << " [" << r.witness.check
     << " at state " << r.witness.state;
  if (r.witness.action) os << ", action " << *r.witness.action;
  os << "]\n";
  if (c.weights) {
    const WeightReport& w = *c.weights;
    os << "weight parameters: " << ok_text(w.parameters_ok) << "\n";
    for (const WeightCondition* wc :
         {&w.reward_upper, &w.reward_lower, &w.growth_upper, &w.growth_lower}) {
      os << "  " << wc->name << ": " << ok_text(wc->ok) << " (worst excess "
         << format_double(wc->worst) << " at state " << wc->state << ")\n";
    }
  }
  const bool passed = r.all_ok() && (!c.weights || c.weights->all_ok());
  os << "result:           " << (passed ? "PASS" : "FAIL") << "\n";
  for (const std::string& f : c.failures) os << "  violation: " << f << "\n";
  return os.str();
}

size_t copy_out(const std::vector<double>& src, double* out, size_t n) {
  if (out) std::memcpy(out, src.data(), std::min(n, src.size()) * sizeof(double));
  return src.size();
}

size_t copy_out(const std::vector<std::size_t>& src, size_t* out, size_t n) {
  if (out) {
    for (size_t i = 0; i < std::min(n, src.size()); ++i) out[i] = src[i];
  }
  return src.size();
}

}  // namespace

extern "C" {

const char* recurdp_version(void) { return "0.1.0"; }

const char* recurdp_status_name(int status) {
  switch (status) {
    case RECURDP_OK: return "ok";
    case RECURDP_E_INVALID_ARGUMENT: return "invalid argument";
    case RECURDP_E_INTERNAL: return "internal error";
    default:
      if (status >= RECURDP_E_PARSE && status <= RECURDP_E_IO) {
        return to_string(static_cast<ErrorCode>(status - 1));
      }
      return "unknown status";
  }
}

const char* recurdp_last_error(void) { return g_last_error.c_str(); }

int recurdp_problem_load(const char* path, recurdp_problem** out) {
  RECURDP_REQUIRE(path && out, "path and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto p = std::make_unique<recurdp_problem>();
    p->loaded = load_model(path);
    rebuild(*p);
    *out = p.release();
    return RECURDP_OK;
  });
}

int recurdp_problem_parse(const char* text, recurdp_problem** out) {
  RECURDP_REQUIRE(text && out, "text and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto p = std::make_unique<recurdp_problem>();
    p->loaded = parse_model(text);
    rebuild(*p);
    *out = p.release();
    return RECURDP_OK;
  });
}

void recurdp_problem_free(recurdp_problem* problem) { delete problem; }

int recurdp_problem_save(const recurdp_problem* problem, const char* path) {
  RECURDP_REQUIRE(problem && path, "problem and path must be non-null");
  return guarded([&] {
    save_model(problem->loaded, path);
    return RECURDP_OK;
  });
}

int recurdp_problem_info_get(const recurdp_problem* problem, recurdp_problem_info* info) {
  RECURDP_REQUIRE(problem && info, "problem and info must be non-null");
  const ModelSpec& m = *problem->loaded.model;
  info->n_s = m.n_s();
  info->n_z = m.n_z();
  info->n_a = m.n_a();
  info->n_states = m.n_states();
  info->minimize = problem->agg->direction() == Direction::kMin ? 1 : 0;
  info->weighted = problem->weight ? 1 : 0;
  info->family = to_string(problem->agg->family());
  return RECURDP_OK;
}

size_t recurdp_problem_norm_weights(const recurdp_problem* problem, double* out, size_t n) {
  if (!problem || !problem->weight) return 0;
  try {
    return copy_out(build_program(*problem).norm_weights(), out, n);
  } catch (const std::exception& e) {
    fail(RECURDP_E_INTERNAL, e.what());
    return 0;
  }
}

int recurdp_problem_set_tol(recurdp_problem* problem, double tol) {
  RECURDP_REQUIRE(problem, "problem must be non-null");
  RECURDP_REQUIRE(tol > 0.0, "tol must be positive");
  problem->loaded.solver.tol = tol;
  return RECURDP_OK;
}

int recurdp_problem_set_max_iter(recurdp_problem* problem, size_t max_iter) {
  RECURDP_REQUIRE(problem, "problem must be non-null");
  RECURDP_REQUIRE(max_iter > 0, "max_iter must be positive");
  problem->loaded.solver.max_iter = max_iter;
  return RECURDP_OK;
}

int recurdp_problem_set_seed(recurdp_problem* problem, uint64_t seed) {
  RECURDP_REQUIRE(problem, "problem must be non-null");
  problem->loaded.solver.seed = seed;
  return RECURDP_OK;
}

int recurdp_problem_set_samples(recurdp_problem* problem, size_t samples) {
  RECURDP_REQUIRE(problem, "problem must be non-null");
  RECURDP_REQUIRE(samples > 0, "samples must be positive");
  problem->loaded.solver.samples = samples;
  return RECURDP_OK;
}

int recurdp_problem_set_delta(recurdp_problem* problem, double delta) {
  RECURDP_REQUIRE(problem, "problem must be non-null");
  RECURDP_REQUIRE(delta > 0.0, "delta must be positive");
  return guarded([&] {
    const auto previous = problem->loaded.solver.delta;
    problem->loaded.solver.delta = delta;
    try {
      rebuild(*problem);
    } catch (...) {
      problem->loaded.solver.delta = previous;
      rebuild(*problem);
      throw;
    }
    return RECURDP_OK;
  });
}

int recurdp_problem_set_threads(recurdp_problem* problem, unsigned threads) {
  RECURDP_REQUIRE(problem, "problem must be non-null");
  problem->threads = threads == 0 ? default_threads() : threads;
  return RECURDP_OK;
}

int recurdp_check_run(const recurdp_problem* problem, recurdp_check** out) {
  RECURDP_REQUIRE(problem && out, "problem and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<recurdp_check>();
    const DynamicProgram program = build_program(*problem);
    CheckOptions opts;
    opts.n_samples = problem->loaded.solver.samples;
    opts.seed = problem->loaded.solver.seed;
    c->report = check_assumptions(program, opts);
    c->failures = c->report.failures;
    if (problem->weight) {
      const auto& ez = dynamic_cast<const EpsteinZinAggregator&>(*problem->agg);
      c->weights = check_weight_assumptions(*problem->loaded.model, ez.params(), *problem->weight);
      for (const std::string& f : c->weights->failures()) c->failures.push_back(f);
    }
    c->text = render_check(*problem, *c);
    *out = c.release();
    return RECURDP_OK;
  });
}

void recurdp_check_free(recurdp_check* check) { delete check; }

int recurdp_check_passed(const recurdp_check* check) {
  if (!check) return 0;
  return check->report.all_ok() && (!check->weights || check->weights->all_ok()) ? 1 : 0;
}

int recurdp_check_summary_get(const recurdp_check* check, recurdp_check_summary* summary) {
  RECURDP_REQUIRE(check && summary, "check and summary must be non-null");
  const AssumptionReport& r = check->report;
  summary->monotone_ok = r.monotone_ok;
  summary->shape_ok = r.shape_ok;
  summary->lower_bound_ok = r.lower_bound_ok;
  summary->upper_bound_ok = r.upper_bound_ok;
  summary->strict_margin_ok = r.strict_margin_ok;
  summary->weights_present = check->weights ? 1 : 0;
  summary->weights_ok = check->weights ? check->weights->all_ok() : 1;
  summary->worst_violation = r.worst_violation;
  summary->samples_used = r.samples_used;
  summary->witness_state = r.witness.state;
  summary->witness_action = r.witness.action ? static_cast<long>(*r.witness.action) : -1;
  return RECURDP_OK;
}

size_t recurdp_check_failure_count(const recurdp_check* check) {
  return check ? check->failures.size() : 0;
}

const char* recurdp_check_failure(const recurdp_check* check, size_t i) {
  if (!check || i >= check->failures.size()) return nullptr;
  return check->failures[i].c_str();
}

const char* recurdp_check_text(const recurdp_check* check) {
  return check ? check->text.c_str() : "";
}

int recurdp_solve(const recurdp_problem* problem, recurdp_report** out) {
  RECURDP_REQUIRE(problem && out, "problem and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<recurdp_report>();
    const DynamicProgram program = build_program(*problem);
    const SolveOptions opts{problem->loaded.solver.tol, problem->loaded.solver.max_iter};
    const auto t0 = std::chrono::steady_clock::now();
    int status = RECURDP_OK;
    try {
      r->report = value_function_iteration(program, opts);
      r->original = to_original_units(*problem->agg, r->report.fixed_point).values;
    } catch (const NonConvergenceError& e) {
      r->report.residuals = e.residuals();
      r->report.iterations = e.residuals().size();
      r->report.contraction_estimate = fit_contraction(r->report.residuals);
      status = fail(RECURDP_E_NONCONVERGENCE, e.what());
    }
    r->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *out = r.release();
    return status;
  });
}

void recurdp_report_free(recurdp_report* report) { delete report; }

int recurdp_report_converged(const recurdp_report* report) {
  return report && report->report.converged ? 1 : 0;
}

size_t recurdp_report_n_states(const recurdp_report* report) {
  return report ? report->report.fixed_point.size() : 0;
}

size_t recurdp_report_iterations(const recurdp_report* report) {
  return report ? report->report.iterations : 0;
}

double recurdp_report_contraction(const recurdp_report* report) {
  return report ? report->report.contraction_estimate : 0.0;
}

double recurdp_report_seconds(const recurdp_report* report) {
  return report ? report->seconds : 0.0;
}

size_t recurdp_report_values(const recurdp_report* report, double* out, size_t n) {
  return report ? copy_out(report->report.fixed_point.values, out, n) : 0;
}

size_t recurdp_report_values_original(const recurdp_report* report, double* out, size_t n) {
  return report ? copy_out(report->original, out, n) : 0;
}

size_t recurdp_report_policy(const recurdp_report* report, size_t* out, size_t n) {
  return report ? copy_out(report->report.policy.action_at, out, n) : 0;
}

size_t recurdp_report_residuals(const recurdp_report* report, double* out, size_t n) {
  return report ? copy_out(report->report.residuals, out, n) : 0;
}

int recurdp_report_export(const recurdp_problem* problem, const recurdp_report* report,
                          const char* dir) {
  RECURDP_REQUIRE(problem && report && dir, "problem, report and dir must be non-null");
  RECURDP_REQUIRE(report->report.converged, "report holds no fixed point");
  return guarded([&] {
    export_report(report->report, *problem->agg, *problem->loaded.model, dir);
    return RECURDP_OK;
  });
}

int recurdp_oracle_run(const recurdp_problem* problem, recurdp_oracle** out) {
  RECURDP_REQUIRE(problem && out, "problem and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto o = std::make_unique<recurdp_oracle>();
    OracleOptions opts;
    opts.tol = std::min(opts.tol, 1e-2 * problem->loaded.solver.tol);
    o->result = enumerate_policies_oracle(build_program(*problem), opts);
    *out = o.release();
    return RECURDP_OK;
  });
}

void recurdp_oracle_free(recurdp_oracle* oracle) { delete oracle; }

size_t recurdp_oracle_policies(const recurdp_oracle* oracle) {
  return oracle ? oracle->result.policies_enumerated : 0;
}

size_t recurdp_oracle_values(const recurdp_oracle* oracle, double* out, size_t n) {
  return oracle ? copy_out(oracle->result.optimal_value.values, out, n) : 0;
}

size_t recurdp_oracle_policy(const recurdp_oracle* oracle, size_t* out, size_t n) {
  return oracle ? copy_out(oracle->result.optimal_policy.action_at, out, n) : 0;
}

int recurdp_bench_run(unsigned threads, recurdp_bench** out) {
  RECURDP_REQUIRE(out, "out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto b = std::make_unique<recurdp_bench>();
    BenchOptions opts;
    opts.threads = threads == 0 ? default_threads() : threads;
    b->rows = run_bench(opts);
    b->csv = bench_csv(b->rows);
    *out = b.release();
    return RECURDP_OK;
  });
}

void recurdp_bench_free(recurdp_bench* bench) { delete bench; }

size_t recurdp_bench_rows(const recurdp_bench* bench) { return bench ? bench->rows.size() : 0; }

const char* recurdp_bench_csv(const recurdp_bench* bench) {
  return bench ? bench->csv.c_str() : "";
}

}  // extern "C"
