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

/* C interface to the recurdp solver. All handles are opaque; every function
 * that can fail returns a recurdp_status and leaves a message retrievable
 * through recurdp_last_error() on the calling thread. */

#ifndef RECURDP_RECURDP_H_
#define RECURDP_RECURDP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(RECURDP_BUILDING_LIBRARY)
#define RECURDP_API __attribute__((visibility("default")))
#else
#define RECURDP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum recurdp_status {
  RECURDP_OK = 0,
  RECURDP_E_PARSE = 1,
  RECURDP_E_INVARIANT = 2,
  RECURDP_E_PARAMETER = 3,
  RECURDP_E_DOMAIN = 4,
  RECURDP_E_FEASIBILITY = 5,
  RECURDP_E_SHAPE = 6,
  RECURDP_E_DIRECTION = 7,
  RECURDP_E_NONCONVERGENCE = 8,
  RECURDP_E_SEARCH_FAILURE = 9,
  RECURDP_E_GUARD = 10,
  RECURDP_E_ASSUMPTION = 11,
  RECURDP_E_IO = 12,
  RECURDP_E_INVALID_ARGUMENT = 13,
  RECURDP_E_INTERNAL = 14
} recurdp_status;

typedef struct recurdp_problem recurdp_problem;
typedef struct recurdp_check recurdp_check;
typedef struct recurdp_report recurdp_report;
typedef struct recurdp_oracle recurdp_oracle;
typedef struct recurdp_bench recurdp_bench;

typedef struct recurdp_problem_info {
  size_t n_s;
  size_t n_z;
  size_t n_a;
  size_t n_states;
  int minimize;  /* 1 for min programs, 0 for max programs */
  int weighted;  /* 1 when the model carries a weight block */
  const char* family;
} recurdp_problem_info;

typedef struct recurdp_check_summary {
  int monotone_ok;
  int shape_ok;
  int lower_bound_ok;
  int upper_bound_ok;
  int strict_margin_ok;
  int weights_present;
  int weights_ok;
  double worst_violation;
  size_t samples_used;
  size_t witness_state;
  long witness_action; /* -1 when the witness is not tied to an action */
} recurdp_check_summary;

RECURDP_API const char* recurdp_version(void);
RECURDP_API const char* recurdp_status_name(int status);
/* Message for the most recent failure on this thread; empty if none. */
RECURDP_API const char* recurdp_last_error(void);

RECURDP_API int recurdp_problem_load(const char* path, recurdp_problem** out);
RECURDP_API int recurdp_problem_parse(const char* text, recurdp_problem** out);
RECURDP_API void recurdp_problem_free(recurdp_problem* problem);
RECURDP_API int recurdp_problem_save(const recurdp_problem* problem, const char* path);
RECURDP_API int recurdp_problem_info_get(const recurdp_problem* problem,
                                         recurdp_problem_info* info);
/* Residual weights kappa^theta of a weighted model; returns 0 otherwise. */
RECURDP_API size_t recurdp_problem_norm_weights(const recurdp_problem* problem, double* out,
                                                size_t n);
RECURDP_API int recurdp_problem_set_tol(recurdp_problem* problem, double tol);
RECURDP_API int recurdp_problem_set_max_iter(recurdp_problem* problem, size_t max_iter);
RECURDP_API int recurdp_problem_set_seed(recurdp_problem* problem, uint64_t seed);
RECURDP_API int recurdp_problem_set_samples(recurdp_problem* problem, size_t samples);
/* Bracket slack override (epsilon margin for the additive family). */
RECURDP_API int recurdp_problem_set_delta(recurdp_problem* problem, double delta);
RECURDP_API int recurdp_problem_set_threads(recurdp_problem* problem, unsigned threads);

/* Samples the bracket and, for weighted models, scans the weight conditions. */
RECURDP_API int recurdp_check_run(const recurdp_problem* problem, recurdp_check** out);
RECURDP_API void recurdp_check_free(recurdp_check* check);
RECURDP_API int recurdp_check_passed(const recurdp_check* check);
RECURDP_API int recurdp_check_summary_get(const recurdp_check* check,
                                          recurdp_check_summary* summary);
RECURDP_API size_t recurdp_check_failure_count(const recurdp_check* check);
RECURDP_API const char* recurdp_check_failure(const recurdp_check* check, size_t i);
/* Multi-line human-readable report. */
RECURDP_API const char* recurdp_check_text(const recurdp_check* check);

/* Value function iteration. On RECURDP_E_NONCONVERGENCE *out still receives a
 * report holding the residual history. */
RECURDP_API int recurdp_solve(const recurdp_problem* problem, recurdp_report** out);
RECURDP_API void recurdp_report_free(recurdp_report* report);
RECURDP_API int recurdp_report_converged(const recurdp_report* report);
RECURDP_API size_t recurdp_report_n_states(const recurdp_report* report);
RECURDP_API size_t recurdp_report_iterations(const recurdp_report* report);
RECURDP_API double recurdp_report_contraction(const recurdp_report* report);
RECURDP_API double recurdp_report_seconds(const recurdp_report* report);
/* Copy functions write min(n, available) entries and return the available count. */
RECURDP_API size_t recurdp_report_values(const recurdp_report* report, double* out, size_t n);
RECURDP_API size_t recurdp_report_values_original(const recurdp_report* report, double* out,
                                                  size_t n);
RECURDP_API size_t recurdp_report_policy(const recurdp_report* report, size_t* out, size_t n);
RECURDP_API size_t recurdp_report_residuals(const recurdp_report* report, double* out,
                                            size_t n);
RECURDP_API int recurdp_report_export(const recurdp_problem* problem,
                                      const recurdp_report* report, const char* dir);

RECURDP_API int recurdp_oracle_run(const recurdp_problem* problem, recurdp_oracle** out);
RECURDP_API void recurdp_oracle_free(recurdp_oracle* oracle);
RECURDP_API size_t recurdp_oracle_policies(const recurdp_oracle* oracle);
RECURDP_API size_t recurdp_oracle_values(const recurdp_oracle* oracle, double* out, size_t n);
RECURDP_API size_t recurdp_oracle_policy(const recurdp_oracle* oracle, size_t* out, size_t n);

/* Times value function iteration over the built-in size ladder. */
RECURDP_API int recurdp_bench_run(unsigned threads, recurdp_bench** out);
RECURDP_API void recurdp_bench_free(recurdp_bench* bench);
RECURDP_API size_t recurdp_bench_rows(const recurdp_bench* bench);
RECURDP_API const char* recurdp_bench_csv(const recurdp_bench* bench);

#ifdef __cplusplus
}
#endif

#endif /* RECURDP_RECURDP_H_ */
