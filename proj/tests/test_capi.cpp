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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "recurdp/recurdp.h"

namespace {

namespace fs = std::filesystem;

const std::string kModels = RECURDP_MODELS_DIR;

std::string model(const std::string& name) { return kModels + "/" + name; }

struct Problem {
  recurdp_problem* p = nullptr;
  ~Problem() { recurdp_problem_free(p); }
};

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(recurdp_version(), "");
  EXPECT_STREQ(recurdp_status_name(RECURDP_OK), "ok");
  EXPECT_STRNE(recurdp_status_name(RECURDP_E_GUARD), recurdp_status_name(RECURDP_E_IO));
  EXPECT_NE(recurdp_status_name(999), nullptr);
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(recurdp_problem_load(nullptr, nullptr), RECURDP_E_INVALID_ARGUMENT);
  recurdp_report* r = nullptr;
  EXPECT_EQ(recurdp_solve(nullptr, &r), RECURDP_E_INVALID_ARGUMENT);
  EXPECT_STRNE(recurdp_last_error(), "");
  recurdp_problem_free(nullptr);
  recurdp_report_free(nullptr);
}

TEST(CApi, LoadInfoSolve) {
  Problem pr;
  ASSERT_EQ(recurdp_problem_load(model("additive_two_state.json").c_str(), &pr.p), RECURDP_OK);
  recurdp_problem_info info{};
  ASSERT_EQ(recurdp_problem_info_get(pr.p, &info), RECURDP_OK);
  EXPECT_EQ(info.n_states, 2u);
  EXPECT_EQ(info.minimize, 0);
  EXPECT_EQ(info.weighted, 0);
  EXPECT_STREQ(info.family, "additive");

  ASSERT_EQ(recurdp_problem_set_tol(pr.p, 1e-12), RECURDP_OK);
  recurdp_report* r = nullptr;
  ASSERT_EQ(recurdp_solve(pr.p, &r), RECURDP_OK);
  EXPECT_EQ(recurdp_report_converged(r), 1);
  double v[2] = {0, 0};
  size_t pol[2] = {9, 9};
  EXPECT_EQ(recurdp_report_values(r, v, 2), 2u);
  EXPECT_EQ(recurdp_report_policy(r, pol, 2), 2u);
  EXPECT_NEAR(v[0], 3.0, 1e-10);
  EXPECT_NEAR(v[1], 4.0, 1e-10);
  EXPECT_EQ(pol[0], 1u);
  EXPECT_EQ(pol[1], 0u);
  EXPECT_NEAR(recurdp_report_contraction(r), 0.5, 1e-6);
  const size_t n_res = recurdp_report_residuals(r, nullptr, 0);
  EXPECT_EQ(n_res, recurdp_report_iterations(r));
  EXPECT_GE(recurdp_report_seconds(r), 0.0);

  const fs::path dir = fs::temp_directory_path() / "recurdp_capi_export";
  fs::remove_all(dir);
  EXPECT_EQ(recurdp_report_export(pr.p, r, dir.c_str()), RECURDP_OK);
  EXPECT_TRUE(fs::exists(dir / "values.csv"));
  EXPECT_TRUE(fs::exists(dir / "policy.csv"));
  EXPECT_TRUE(fs::exists(dir / "diagnostics.csv"));
  recurdp_report_free(r);
}

TEST(CApi, NonConvergenceStillReturnsReport) {
  Problem pr;
  ASSERT_EQ(recurdp_problem_load(model("additive_two_state.json").c_str(), &pr.p), RECURDP_OK);
  recurdp_problem_set_tol(pr.p, 1e-15);
  recurdp_problem_set_max_iter(pr.p, 3);
  recurdp_report* r = nullptr;
  EXPECT_EQ(recurdp_solve(pr.p, &r), RECURDP_E_NONCONVERGENCE);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(recurdp_report_converged(r), 0);
  EXPECT_EQ(recurdp_report_residuals(r, nullptr, 0), 3u);
  recurdp_report_free(r);
}

TEST(CApi, ParseErrorsCarryStatusAndMessage) {
  recurdp_problem* p = nullptr;
  EXPECT_EQ(recurdp_problem_parse("{ not json", &p), RECURDP_E_PARSE);
  EXPECT_EQ(p, nullptr);
  EXPECT_NE(std::string(recurdp_last_error()).find("1:"), std::string::npos);
  EXPECT_EQ(recurdp_problem_load(model("negative/kernel_row_short.json").c_str(), &p),
            RECURDP_E_INVARIANT);
  EXPECT_EQ(recurdp_problem_load(model("negative/epstein_zin_unit_rho.json").c_str(), &p),
            RECURDP_E_PARAMETER);
}

TEST(CApi, CheckPassesAndFails) {
  Problem good;
  ASSERT_EQ(recurdp_problem_load(model("risk_sensitive.json").c_str(), &good.p), RECURDP_OK);
  recurdp_check* c = nullptr;
  ASSERT_EQ(recurdp_check_run(good.p, &c), RECURDP_OK);
  EXPECT_EQ(recurdp_check_passed(c), 1);
  EXPECT_EQ(recurdp_check_failure_count(c), 0u);
  EXPECT_NE(std::string(recurdp_check_text(c)).size(), 0u);
  recurdp_check_free(c);

  Problem bad;
  ASSERT_EQ(recurdp_problem_load(model("negative/additive_beta_above_one.json").c_str(), &bad.p),
            RECURDP_OK);
  ASSERT_EQ(recurdp_check_run(bad.p, &c), RECURDP_OK);
  EXPECT_EQ(recurdp_check_passed(c), 0);
  recurdp_check_summary s{};
  ASSERT_EQ(recurdp_check_summary_get(c, &s), RECURDP_OK);
  EXPECT_EQ(s.upper_bound_ok, 0);
  EXPECT_GT(s.worst_violation, 0.0);
  ASSERT_GT(recurdp_check_failure_count(c), 0u);
  EXPECT_NE(std::string(recurdp_check_failure(c, 0)).find("upper solution"), std::string::npos);
  EXPECT_EQ(recurdp_check_failure(c, 1000), nullptr);
  recurdp_check_free(c);
}

TEST(CApi, WeightedModelReportsWeights) {
  Problem pr;
  ASSERT_EQ(recurdp_problem_load(model("weighted_growth.json").c_str(), &pr.p), RECURDP_OK);
  recurdp_problem_info info{};
  recurdp_problem_info_get(pr.p, &info);
  EXPECT_EQ(info.weighted, 1);
  std::vector<double> w(info.n_states);
  EXPECT_EQ(recurdp_problem_norm_weights(pr.p, w.data(), w.size()), info.n_states);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  recurdp_check* c = nullptr;
  ASSERT_EQ(recurdp_check_run(pr.p, &c), RECURDP_OK);
  recurdp_check_summary s{};
  recurdp_check_summary_get(c, &s);
  EXPECT_EQ(s.weights_present, 1);
  EXPECT_EQ(s.weights_ok, 1);
  recurdp_check_free(c);
}

TEST(CApi, OracleMatchesSolve) {
  Problem pr;
  ASSERT_EQ(recurdp_problem_load(model("epstein_zin_concave.json").c_str(), &pr.p), RECURDP_OK);
  recurdp_problem_set_tol(pr.p, 1e-12);
  recurdp_oracle* o = nullptr;
  ASSERT_EQ(recurdp_oracle_run(pr.p, &o), RECURDP_OK);
  recurdp_report* r = nullptr;
  ASSERT_EQ(recurdp_solve(pr.p, &r), RECURDP_OK);
  const size_t n = recurdp_report_n_states(r);
  std::vector<double> a(n), b(n);
  recurdp_report_values(r, a.data(), n);
  EXPECT_EQ(recurdp_oracle_values(o, b.data(), n), n);
  for (size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
  EXPECT_GT(recurdp_oracle_policies(o), 0u);
  recurdp_oracle_free(o);
  recurdp_report_free(r);
}

TEST(CApi, GuardStatus) {
  Problem pr;
  ASSERT_EQ(recurdp_problem_load(model("guard_ten_by_ten.json").c_str(), &pr.p), RECURDP_OK);
  recurdp_oracle* o = nullptr;
  EXPECT_EQ(recurdp_oracle_run(pr.p, &o), RECURDP_E_GUARD);
  EXPECT_EQ(o, nullptr);
}

TEST(CApi, SettersValidate) {
  Problem pr;
  ASSERT_EQ(recurdp_problem_load(model("additive_two_state.json").c_str(), &pr.p), RECURDP_OK);
  EXPECT_NE(recurdp_problem_set_tol(pr.p, -1.0), RECURDP_OK);
  EXPECT_NE(recurdp_problem_set_delta(pr.p, 0.0), RECURDP_OK);
  EXPECT_EQ(recurdp_problem_set_delta(pr.p, 0.2), RECURDP_OK);
  EXPECT_EQ(recurdp_problem_set_threads(pr.p, 2), RECURDP_OK);
  EXPECT_EQ(recurdp_problem_set_seed(pr.p, 7), RECURDP_OK);
  EXPECT_EQ(recurdp_problem_set_samples(pr.p, 10), RECURDP_OK);
}

TEST(CApi, SaveRoundTrip) {
  Problem pr;
  ASSERT_EQ(recurdp_problem_load(model("narrow_framing.json").c_str(), &pr.p), RECURDP_OK);
  const fs::path out = fs::temp_directory_path() / "recurdp_capi_save.json";
  ASSERT_EQ(recurdp_problem_save(pr.p, out.c_str()), RECURDP_OK);
  Problem again;
  EXPECT_EQ(recurdp_problem_load(out.c_str(), &again.p), RECURDP_OK);
}

}  // namespace
