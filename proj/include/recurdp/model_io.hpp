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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "recurdp/aggregators.hpp"
#include "recurdp/dp_core.hpp"
#include "recurdp/unbounded.hpp"

namespace recurdp {

inline constexpr int kModelFormatVersion = 1;

using FamilyParams = std::variant<AdditiveParams, EZParams, RiskSensitiveParams, AmbiguityParams,
                                  NarrowFramingParams>;

AggregatorPtr make_aggregator(const FamilyParams& params);

/// Replaces the family's bracket slack (the epsilon margin for additive).
void override_delta(FamilyParams& params, double delta);

struct SolverSettings {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  std::optional<double> delta;
  std::uint64_t seed = 0;
  std::size_t samples = 200;
};

struct LoadedModel {
  std::shared_ptr<const ModelSpec> model;
  FamilyParams family;
  AggregatorPtr aggregator;
  std::optional<WeightSpec> weight;
  SolverSettings solver;
};

/// Parses and validates a model file. Throws Error(kParse) for syntax, type
/// and unknown-key problems (with line or key context), Error(kInvariant) or
/// Error(kParameter) for semantic ones.
LoadedModel load_model(const std::filesystem::path& path);
LoadedModel parse_model(const std::string& text, const std::string& source = "<string>");

/// Serializes to the model file format. Doubles are written round-trip exact.
std::string dump_model(const LoadedModel& loaded);
void save_model(const LoadedModel& loaded, const std::filesystem::path& path);

/// Writes values.csv, policy.csv and diagnostics.csv into `dir` (created if
/// missing). Throws Error(kIo) when a file cannot be written.
void export_report(const SolveReport& report, const Aggregator& agg, const ModelSpec& model,
                   const std::filesystem::path& dir);

/// "%.17g" formatting shared by every CSV writer.
std::string format_double(double x);

}  // namespace recurdp
