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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "recurdp/error.hpp"
#include "recurdp/model_io.hpp"
#include "recurdp/verify.hpp"
#include "support.hpp"

namespace recurdp {
namespace {

namespace fs = std::filesystem;
using testing::Rng;

const fs::path kModels = RECURDP_MODELS_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("recurdp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::pair<ErrorCode, std::string> parse_error(const std::string& text) {
  try {
    parse_model(text, "inline.json");
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  ADD_FAILURE() << "parse_model accepted: " << text;
  return {ErrorCode::kIo, ""};
}

const char* kBase = R"({
  "format_version": 1,
  "grids": {"s": [0, 1], "z": [0], "a": [0, 1]},
  "successor": [[0, 1], [1, 0]],
  "feasibility": "all",
  "kernel": [[1.0]],
  "reward": [[[0.0], [1.0]], [[2.0], [0.0]]],
  "family": {"name": "additive", "beta": 0.5}
})";

TEST(ModelIo, ParsesMinimalAdditiveModel) {
  const LoadedModel lm = parse_model(kBase);
  EXPECT_EQ(lm.model->n_states(), 2u);
  EXPECT_EQ(lm.aggregator->family(), Family::kAdditive);
  EXPECT_DOUBLE_EQ(lm.model->reward_at(1, 0), 2.0);
  EXPECT_EQ(lm.model->next_endogenous(1, 1), 0u);
  EXPECT_FALSE(lm.weight.has_value());
  EXPECT_DOUBLE_EQ(lm.solver.tol, 1e-10);
  const auto r = value_function_iteration(DynamicProgram(lm.model, lm.aggregator));
  EXPECT_NEAR(r.fixed_point[0], 3.0, 1e-9);
}

TEST(ModelIo, LoadsEveryBundledModel) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(kModels)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const LoadedModel lm = load_model(entry.path());
    EXPECT_GT(lm.model->n_states(), 0u) << entry.path();
  }
  EXPECT_GE(count, 9u);
}

TEST(ModelIo, NegativeModelsFailAsDocumented) {
  const fs::path neg = kModels / "negative";
  EXPECT_NO_THROW(load_model(neg / "additive_beta_above_one.json"));
  EXPECT_NO_THROW(load_model(neg / "epstein_zin_mislabeled.json"));
  for (const char* name : {"epstein_zin_unit_rho.json", "kernel_row_short.json"}) {
    try {
      load_model(neg / name);
      ADD_FAILURE() << name << " loaded";
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kParameter || e.code() == ErrorCode::kInvariant) << name;
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
    }
  }
}

TEST(ModelIo, ReportsJsonPathOnTypeError) {
  std::string text = kBase;
  text.replace(text.find("\"beta\": 0.5"), 11, "\"beta\": \"x\"");
  const auto [code, what] = parse_error(text);
  EXPECT_EQ(code, ErrorCode::kParse);
  EXPECT_NE(what.find("$.family.beta"), std::string::npos) << what;
}

TEST(ModelIo, RejectsUnknownKeys) {
  std::string text = kBase;
  text.replace(text.find("\"beta\": 0.5"), 11, "\"beta\": 0.5, \"betta\": 0.4");
  const auto [code, what] = parse_error(text);
  EXPECT_EQ(code, ErrorCode::kParse);
  EXPECT_NE(what.find("betta"), std::string::npos) << what;
}

TEST(ModelIo, ReportsLineAndColumnOnSyntaxError) {
  const auto [code, what] = parse_error("{\n  \"format_version\": 1,\n  oops\n}");
  EXPECT_EQ(code, ErrorCode::kParse);
  EXPECT_NE(what.find("inline.json:3:"), std::string::npos) << what;
}

TEST(ModelIo, RejectsWrongVersion) {
  std::string text = kBase;
  text.replace(text.find("\"format_version\": 1"), 19, "\"format_version\": 7");
  EXPECT_EQ(parse_error(text).first, ErrorCode::kParse);
}

TEST(ModelIo, RejectsShapeMismatch) {
  std::string text = kBase;
  text.replace(text.find("[[[0.0], [1.0]], [[2.0], [0.0]]]"), 32, "[[[0.0], [1.0]]]");
  const auto code = parse_error(text).first;
  EXPECT_TRUE(code == ErrorCode::kParse || code == ErrorCode::kInvariant);
}

TEST(ModelIo, FeasibilityPairsAndTriples) {
  std::string text = kBase;
  text.replace(text.find("\"all\""), 5, "[[0, 0], [1, 0], [1, 1]]");
  const auto lm = parse_model(text);
  EXPECT_TRUE(lm.model->is_feasible(0, 0));
  EXPECT_FALSE(lm.model->is_feasible(0, 1));
  EXPECT_TRUE(lm.model->is_feasible(1, 1));
  text = kBase;
  text.replace(text.find("\"all\""), 5, "[[0, 0, 1], [1, 0, 0]]");
  const auto lt = parse_model(text);
  EXPECT_TRUE(lt.model->is_feasible(0, 1));
  EXPECT_FALSE(lt.model->is_feasible(0, 0));
}

TEST(ModelIo, SolverDeltaOverridesFamily) {
  std::string text = kBase;
  text.replace(text.find("\"family\""), 8, "\"solver\": {\"delta\": 0.25}, \"family\"");
  const auto lm = parse_model(text);
  ASSERT_TRUE(lm.solver.delta.has_value());
  // The declared family block is kept as written; only the solver sees the override.
  EXPECT_DOUBLE_EQ(std::get<AdditiveParams>(lm.family).eps_margin, 0.1);
  EXPECT_DOUBLE_EQ(lm.aggregator->bracket(*lm.model).epsilon, 0.25);
}

TEST(ModelIo, MissingFileIsReported) {
  EXPECT_THROW(load_model(kModels / "does_not_exist.json"), Error);
}

LoadedModel wrap(const testing::Instance& inst) {
  LoadedModel lm;
  lm.model = inst.model;
  lm.aggregator = inst.agg;
  if (auto* p = dynamic_cast<const AdditiveAggregator*>(inst.agg.get())) lm.family = p->params();
  if (auto* p = dynamic_cast<const EpsteinZinAggregator*>(inst.agg.get())) lm.family = p->params();
  if (auto* p = dynamic_cast<const RiskSensitiveAggregator*>(inst.agg.get())) lm.family = p->params();
  if (auto* p = dynamic_cast<const AmbiguityAggregator*>(inst.agg.get())) lm.family = p->params();
  if (auto* p = dynamic_cast<const NarrowFramingAggregator*>(inst.agg.get())) lm.family = p->params();
  return lm;
}

TEST(ModelIo, RoundTripPreservesEvaluations) {
  Rng rng(101);
  for (auto f : testing::all_families()) {
    for (int t = 0; t < 5; ++t) {
      const auto inst = testing::random_instance(rng, f);
      const LoadedModel before = wrap(inst);
      const std::string text = dump_model(before);
      const LoadedModel after = parse_model(text);
      EXPECT_EQ(dump_model(after), text) << testing::fam_name(f);
      EXPECT_EQ(after.model->kernel, inst.model->kernel);
      EXPECT_EQ(after.model->reward, inst.model->reward);
      EXPECT_EQ(after.model->feasible, inst.model->feasible);
      const Bracket b = inst.agg->bracket(*inst.model);
      for (StateIndex x = 0; x < inst.model->n_states(); ++x) {
        for (ActionIndex a : inst.model->feasible_actions(x)) {
          EXPECT_EQ(after.aggregator->evaluate(*after.model, x, a, b.upper),
                    inst.agg->evaluate(*inst.model, x, a, b.upper));
        }
      }
    }
  }
}

TEST(ModelIo, WeightBlockRoundTrip) {
  const auto lm = load_model(kModels / "weighted_growth.json");
  ASSERT_TRUE(lm.weight.has_value());
  EXPECT_EQ(lm.weight->kappa.size(), lm.model->n_states());
  const auto again = parse_model(dump_model(lm));
  ASSERT_TRUE(again.weight.has_value());
  EXPECT_EQ(again.weight->kappa, lm.weight->kappa);
  EXPECT_DOUBLE_EQ(again.weight->c, lm.weight->c);
}

TEST(ModelIo, SaveAndLoad) {
  const auto dir = scratch("save");
  const auto lm = load_model(kModels / "ambiguity.json");
  save_model(lm, dir / "copy.json");
  const auto back = load_model(dir / "copy.json");
  EXPECT_EQ(dump_model(back), dump_model(lm));
}

TEST(Export, WritesThreeCsvFiles) {
  const auto dir = scratch("export");
  const auto lm = parse_model(kBase);
  const auto r = value_function_iteration(DynamicProgram(lm.model, lm.aggregator), {1e-12, 1000});
  export_report(r, *lm.aggregator, *lm.model, dir);
  const std::string values = slurp(dir / "values.csv");
  EXPECT_EQ(values.substr(0, values.find('\n')), "s_label,z_label,v_transformed,v_original_units");
  EXPECT_NE(values.find("\n1,0,"), std::string::npos);
  const std::string policy = slurp(dir / "policy.csv");
  EXPECT_EQ(policy, "s_label,z_label,action_label\n0,0,1\n1,0,0\n");
  const std::string diag = slurp(dir / "diagnostics.csv");
  std::size_t lines = 0;
  for (char c : diag) lines += c == '\n';
  EXPECT_EQ(lines, r.residuals.size() + 1);
}

TEST(Export, FormatDoubleRoundTrips) {
  Rng rng(103);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(testing::uniform(rng, -1, 1), static_cast<int>(testing::pick(rng, 0, 200)) - 100);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

}  // namespace
}  // namespace recurdp
