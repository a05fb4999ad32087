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

#include "recurdp/model_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "recurdp/error.hpp"

namespace recurdp {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

// Thin cursor over a json value that carries its key path for messages.
class Node {
 public:
  Node(const json& value, std::string path) : v_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return v_; }

  bool has(const char* key) const { return v_.contains(key); }

  Node at(const char* key) const {
    if (!v_.contains(key)) parse_fail(path_, std::string("missing key '") + key + "'");
    return Node(v_.at(key), path_ + "." + key);
  }
  Node at(std::size_t i) const { return Node(v_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  void object(std::initializer_list<const char*> allowed) const {
    if (!v_.is_object()) parse_fail(path_, "expected an object");
    for (auto it = v_.begin(); it != v_.end(); ++it) {
      if (std::none_of(allowed.begin(), allowed.end(),
                       [&](const char* k) { return it.key() == k; })) {
        parse_fail(path_, "unknown key '" + it.key() + "'");
      }
    }
  }

  std::size_t array(std::optional<std::size_t> expected = std::nullopt) const {
    if (!v_.is_array()) parse_fail(path_, "expected an array");
    if (expected && v_.size() != *expected) {
      parse_fail(path_, "expected " + std::to_string(*expected) + " entries, got " +
                            std::to_string(v_.size()));
    }
    return v_.size();
  }

  double number() const {
    if (!v_.is_number()) parse_fail(path_, "expected a number");
    return v_.get<double>();
  }

  std::size_t index() const {
    if (!v_.is_number_unsigned() && !(v_.is_number_integer() && v_.get<std::int64_t>() >= 0)) {
      parse_fail(path_, "expected a non-negative integer");
    }
    return v_.get<std::size_t>();
  }

  std::string string() const {
    if (!v_.is_string()) parse_fail(path_, "expected a string");
    return v_.get<std::string>();
  }

  std::vector<double> numbers(std::optional<std::size_t> expected = std::nullopt) const {
    const std::size_t n = array(expected);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(i).number();
    return out;
  }

  // Row-major matrix of the given shape.
  std::vector<double> matrix(std::size_t rows, std::size_t cols) const {
    array(rows);
    std::vector<double> out;
    out.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = at(r).numbers(cols);
      out.insert(out.end(), row.begin(), row.end());
    }
    return out;
  }

 private:
  const json& v_;
  std::string path_;
};

std::optional<double> opt_number(const Node& n, const char* key) {
  if (!n.has(key)) return std::nullopt;
  return n.at(key).number();
}

// s x a x z table, stored (s, a, z) row-major.
std::vector<double> read_saz(const Node& n, std::size_t ns, std::size_t na, std::size_t nz) {
  n.array(ns);
  std::vector<double> out;
  out.reserve(ns * na * nz);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto block = n.at(s).matrix(na, nz);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

EzRegime parse_regime(const Node& n) {
  const std::string s = n.string();
  for (EzRegime r : {EzRegime::kConvexMax, EzRegime::kConcaveMin,
                     EzRegime::kConcaveMinThetaAbove}) {
    if (s == to_string(r)) return r;
  }
  parse_fail(n.path(), "unknown regime '" + s +
                           "' (expected convex-max, concave-min or concave-min-theta>1)");
}

FamilyParams read_family(const Node& f, std::size_t nz) {
  const std::string name = f.at("name").string();
  auto only = [&](std::initializer_list<const char*> keys) {
    f.object(keys);
  };
  if (name == "additive") {
    only({"name", "beta", "eps_margin"});
    AdditiveParams p;
    p.beta = f.at("beta").number();
    if (f.has("eps_margin")) p.eps_margin = f.at("eps_margin").number();
    return p;
  }
  if (name == "epstein_zin") {
    only({"name", "beta", "rho", "gamma", "delta", "regime"});
    EZParams p;
    p.beta = f.at("beta").number();
    p.rho = f.at("rho").number();
    p.gamma = f.at("gamma").number();
    p.delta = opt_number(f, "delta");
    if (f.has("regime")) p.regime = parse_regime(f.at("regime"));
    return p;
  }
  if (name == "risk_sensitive") {
    only({"name", "beta", "theta", "delta", "reward_bound"});
    RiskSensitiveParams p;
    p.beta = f.at("beta").number();
    p.theta = f.at("theta").number();
    p.delta = opt_number(f, "delta");
    p.reward_bound = opt_number(f, "reward_bound");
    return p;
  }
  if (name == "ambiguity") {
    only({"name", "beta", "rho", "gamma", "eta", "delta", "models", "prior"});
    AmbiguityParams p;
    p.beta = f.at("beta").number();
    p.rho = f.at("rho").number();
    p.gamma = f.at("gamma").number();
    p.eta = f.at("eta").number();
    p.delta = opt_number(f, "delta");
    const Node models = f.at("models");
    const std::size_t k = models.array();
    if (k == 0) parse_fail(models.path(), "at least one model is required");
    for (std::size_t i = 0; i < k; ++i) {
      const Node m = models.at(i);
      m.object({"label", "kernel"});
      p.theta_labels.push_back(m.at("label").number());
      p.kernels.push_back(m.at("kernel").matrix(nz, nz));
    }
    p.mu = f.at("prior").matrix(nz, k);
    return p;
  }
  if (name == "narrow_framing") {
    only({"name", "beta", "rho", "gamma"});
    NarrowFramingParams p;
    p.beta = f.at("beta").number();
    p.rho = f.at("rho").number();
    p.gamma = f.at("gamma").number();
    return p;
  }
  parse_fail(f.path() + ".name", "unknown family '" + name +
                                     "' (expected additive, epstein_zin, risk_sensitive, "
                                     "ambiguity or narrow_framing)");
}

WeightSpec read_weight(const Node& w, std::size_t ns, std::size_t nz) {
  w.object({"kappa", "L", "M", "c", "d", "delta"});
  WeightSpec spec;
  spec.kappa = w.at("kappa").matrix(ns, nz);
  spec.L = w.at("L").number();
  spec.M = w.at("M").number();
  spec.c = w.at("c").number();
  spec.d = w.has("d") ? w.at("d").number() : 0.0;
  spec.delta = opt_number(w, "delta");
  return spec;
}

void validate_weight(const WeightSpec& w, const FamilyParams& family) {
  const auto* ez = std::get_if<EZParams>(&family);
  if (!ez || !(ez->theta() > 1.0) || !(ez->rho > 1.0)) {
    throw Error(ErrorCode::kInvariant,
                "weight block requires the epstein_zin family with 1 < rho < gamma");
  }
  for (std::size_t x = 0; x < w.kappa.size(); ++x) {
    if (!(w.kappa[x] >= 1.0) || !std::isfinite(w.kappa[x])) {
      throw Error(ErrorCode::kInvariant,
                  "weight.kappa must be finite and >= 1 (state " + std::to_string(x) + ")");
    }
  }
  if (!(w.L > 0.0) || !(w.L <= w.M)) {
    throw Error(ErrorCode::kInvariant, "weight: 0 < L <= M is required");
  }
  const double cap = std::pow(ez->beta, -ez->theta());
  if (!(w.c > 0.0 && w.c < cap)) {
    throw Error(ErrorCode::kInvariant, "weight: c must lie in (0, beta^-theta)");
  }
  if (!(w.d >= 0.0 && w.d < cap)) {
    throw Error(ErrorCode::kInvariant, "weight: d must lie in [0, beta^-theta)");
  }
  const double delta = w.delta_value();
  if (!(delta > 0.0 && delta < w.L)) {
    throw Error(ErrorCode::kInvariant, "weight: delta must lie in (0, L)");
  }
}

LoadedModel read_document(const json& doc) {
  const Node root(doc, "$");
  root.object({"format_version", "grids", "successor", "feasibility", "kernel", "reward",
               "gamble_utility", "family", "weight", "solver"});
  const Node version = root.at("format_version");
  if (version.index() != static_cast<std::size_t>(kModelFormatVersion)) {
    parse_fail(version.path(), "unsupported format_version " + version.raw().dump() +
                                   " (expected " + std::to_string(kModelFormatVersion) + ")");
  }

  auto spec = std::make_shared<ModelSpec>();
  const Node grids = root.at("grids");
  grids.object({"s", "z", "a"});
  spec->s_grid = grids.at("s").numbers();
  spec->z_grid = grids.at("z").numbers();
  spec->a_grid = grids.at("a").numbers();
  const std::size_t ns = spec->n_s();
  const std::size_t nz = spec->n_z();
  const std::size_t na = spec->n_a();
  if (ns == 0 || nz == 0 || na == 0) parse_fail(grids.path(), "grids must be non-empty");

  if (root.has("successor")) {
    const Node succ = root.at("successor");
    succ.array(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      const Node row = succ.at(s);
      row.array(na);
      for (std::size_t a = 0; a < na; ++a) spec->successor.push_back(row.at(a).index());
    }
  }

  spec->feasible.assign(ns * nz * na, 0);
  const Node feas = root.at("feasibility");
  if (feas.raw().is_string()) {
    if (feas.string() != "all") parse_fail(feas.path(), "expected \"all\" or a list of pairs");
    std::fill(spec->feasible.begin(), spec->feasible.end(), 1);
  } else {
    const std::size_t count = feas.array();
    for (std::size_t i = 0; i < count; ++i) {
      const Node entry = feas.at(i);
      const std::size_t len = entry.array();
      if (len != 2 && len != 3) parse_fail(entry.path(), "expected [s, a] or [s, z, a]");
      const std::size_t s = entry.at(std::size_t{0}).index();
      const std::size_t a = entry.at(len - 1).index();
      if (s >= ns || a >= na) parse_fail(entry.path(), "index out of range");
      if (len == 2) {
        for (std::size_t z = 0; z < nz; ++z) spec->feasible[(s * nz + z) * na + a] = 1;
      } else {
        const std::size_t z = entry.at(std::size_t{1}).index();
        if (z >= nz) parse_fail(entry.path(), "index out of range");
        spec->feasible[(s * nz + z) * na + a] = 1;
      }
    }
  }

  spec->kernel = root.at("kernel").matrix(nz, nz);
  spec->reward = read_saz(root.at("reward"), ns, na, nz);
  if (root.has("gamble_utility")) spec->gamble_utility =
      read_saz(root.at("gamble_utility"), ns, na, nz);
  spec->validate();

  LoadedModel out;
  out.family = read_family(root.at("family"), nz);

  if (root.has("solver")) {
    const Node s = root.at("solver");
    s.object({"tol", "max_iter", "delta", "seed", "samples"});
    if (s.has("tol")) out.solver.tol = s.at("tol").number();
    if (s.has("max_iter")) out.solver.max_iter = s.at("max_iter").index();
    out.solver.delta = opt_number(s, "delta");
    if (s.has("seed")) out.solver.seed = s.at("seed").index();
    if (s.has("samples")) out.solver.samples = s.at("samples").index();
    if (!(out.solver.tol > 0.0)) parse_fail(s.path() + ".tol", "must be positive");
    if (out.solver.samples == 0) parse_fail(s.path() + ".samples", "must be at least 1");
  }
  if (root.has("weight")) {
    out.weight = read_weight(root.at("weight"), ns, nz);
    validate_weight(*out.weight, out.family);
  }

  FamilyParams effective = out.family;
  if (out.solver.delta) override_delta(effective, *out.solver.delta);
  out.aggregator = make_aggregator(effective);
  out.aggregator->validate(*spec);
  out.model = std::move(spec);
  return out;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ojson sz_table(const std::vector<double>& t, std::size_t ns, std::size_t na, std::size_t nz) {
  ojson out = ojson::array();
  for (std::size_t s = 0; s < ns; ++s) {
    ojson block = ojson::array();
    for (std::size_t a = 0; a < na; ++a) {
      ojson row = ojson::array();
      for (std::size_t z = 0; z < nz; ++z) row.push_back(t[(s * na + a) * nz + z]);
      block.push_back(std::move(row));
    }
    out.push_back(std::move(block));
  }
  return out;
}

ojson matrix_json(const std::vector<double>& t, std::size_t rows, std::size_t cols) {
  ojson out = ojson::array();
  for (std::size_t r = 0; r < rows; ++r) {
    ojson row = ojson::array();
    for (std::size_t c = 0; c < cols; ++c) row.push_back(t[r * cols + c]);
    out.push_back(std::move(row));
  }
  return out;
}

ojson family_json(const FamilyParams& params, std::size_t nz) {
  ojson f;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AdditiveParams>) {
          f["name"] = "additive";
          f["beta"] = p.beta;
          f["eps_margin"] = p.eps_margin;
        } else if constexpr (std::is_same_v<T, EZParams>) {
          f["name"] = "epstein_zin";
          f["beta"] = p.beta;
          f["rho"] = p.rho;
          f["gamma"] = p.gamma;
          if (p.delta) f["delta"] = *p.delta;
          if (p.regime) f["regime"] = to_string(*p.regime);
        } else if constexpr (std::is_same_v<T, RiskSensitiveParams>) {
          f["name"] = "risk_sensitive";
          f["beta"] = p.beta;
          f["theta"] = p.theta;
          if (p.delta) f["delta"] = *p.delta;
          if (p.reward_bound) f["reward_bound"] = *p.reward_bound;
        } else if constexpr (std::is_same_v<T, AmbiguityParams>) {
          f["name"] = "ambiguity";
          f["beta"] = p.beta;
          f["rho"] = p.rho;
          f["gamma"] = p.gamma;
          f["eta"] = p.eta;
          if (p.delta) f["delta"] = *p.delta;
          ojson models = ojson::array();
          for (std::size_t k = 0; k < p.theta_labels.size(); ++k) {
            ojson m;
            m["label"] = p.theta_labels[k];
            m["kernel"] = matrix_json(p.kernels[k], nz, nz);
            models.push_back(std::move(m));
          }
          f["models"] = std::move(models);
          f["prior"] = matrix_json(p.mu, nz, p.theta_labels.size());
        } else {
          f["name"] = "narrow_framing";
          f["beta"] = p.beta;
          f["rho"] = p.rho;
          f["gamma"] = p.gamma;
        }
      },
      params);
  return f;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace

AggregatorPtr make_aggregator(const FamilyParams& params) {
  return std::visit(
      [](const auto& p) -> AggregatorPtr {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AdditiveParams>) {
          return std::make_shared<AdditiveAggregator>(p);
        } else if constexpr (std::is_same_v<T, EZParams>) {
          return std::make_shared<EpsteinZinAggregator>(p);
        } else if constexpr (std::is_same_v<T, RiskSensitiveParams>) {
          return std::make_shared<RiskSensitiveAggregator>(p);
        } else if constexpr (std::is_same_v<T, AmbiguityParams>) {
          return std::make_shared<AmbiguityAggregator>(p);
        } else {
          return std::make_shared<NarrowFramingAggregator>(p);
        }
      },
      params);
}

void override_delta(FamilyParams& params, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::kParameter, "delta override must be positive");
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AdditiveParams>) {
          p.eps_margin = delta;
        } else if constexpr (!std::is_same_v<T, NarrowFramingParams>) {
          p.delta = delta;
        }
      },
      params);
}

LoadedModel parse_model(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": malformed document ("
       << e.what() << ")";
    throw Error(ErrorCode::kParse, os.str());
  }
  try {
    return read_document(doc);
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), path.string());
}

std::string dump_model(const LoadedModel& loaded) {
  const ModelSpec& m = *loaded.model;
  const std::size_t ns = m.n_s();
  const std::size_t nz = m.n_z();
  const std::size_t na = m.n_a();
  ojson doc;
  doc["format_version"] = kModelFormatVersion;
  doc["grids"]["s"] = m.s_grid;
  doc["grids"]["z"] = m.z_grid;
  doc["grids"]["a"] = m.a_grid;
  if (!m.successor.empty()) {
    ojson succ = ojson::array();
    for (std::size_t s = 0; s < ns; ++s) {
      succ.push_back(std::vector<std::size_t>(m.successor.begin() + s * na,
                                              m.successor.begin() + (s + 1) * na));
    }
    doc["successor"] = std::move(succ);
  }
  const bool all = std::all_of(m.feasible.begin(), m.feasible.end(),
                               [](unsigned char f) { return f != 0; });
  if (all) {
    doc["feasibility"] = "all";
  } else {
    bool z_free = true;
    for (std::size_t s = 0; s < ns && z_free; ++s) {
      for (std::size_t a = 0; a < na && z_free; ++a) {
        for (std::size_t z = 1; z < nz; ++z) {
          if (m.is_feasible(s * nz + z, a) != m.is_feasible(s * nz, a)) z_free = false;
        }
      }
    }
    ojson list = ojson::array();
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t z = 0; z < (z_free ? 1 : nz); ++z) {
        for (std::size_t a = 0; a < na; ++a) {
          if (!m.is_feasible(s * nz + z, a)) continue;
          list.push_back(z_free ? ojson::array({s, a}) : ojson::array({s, z, a}));
        }
      }
    }
    doc["feasibility"] = std::move(list);
  }
  doc["kernel"] = matrix_json(m.kernel, nz, nz);
  doc["reward"] = sz_table(m.reward, ns, na, nz);
  if (m.gamble_utility) doc["gamble_utility"] = sz_table(*m.gamble_utility, ns, na, nz);
  doc["family"] = family_json(loaded.family, nz);
  if (loaded.weight) {
    const WeightSpec& w = *loaded.weight;
    ojson wj;
    wj["kappa"] = matrix_json(w.kappa, ns, nz);
    wj["L"] = w.L;
    wj["M"] = w.M;
    wj["c"] = w.c;
    wj["d"] = w.d;
    if (w.delta) wj["delta"] = *w.delta;
    doc["weight"] = std::move(wj);
  }
  ojson solver;
  solver["tol"] = loaded.solver.tol;
  solver["max_iter"] = loaded.solver.max_iter;
  if (loaded.solver.delta) solver["delta"] = *loaded.solver.delta;
  solver["seed"] = loaded.solver.seed;
  solver["samples"] = loaded.solver.samples;
  doc["solver"] = std::move(solver);
  return doc.dump(2) + "\n";
}

void save_model(const LoadedModel& loaded, const std::filesystem::path& path) {
  write_file(path, dump_model(loaded));
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void export_report(const SolveReport& report, const Aggregator& agg, const ModelSpec& model,
                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  if (report.fixed_point.size() != model.n_states() ||
      report.policy.size() != model.n_states()) {
    throw Error(ErrorCode::kShape, "report does not match the model's state count");
  }
  const ValueFunction original = to_original_units(agg, report.fixed_point);

  std::string values = "s_label,z_label,v_transformed,v_original_units\n";
  std::string policy = "s_label,z_label,action_label\n";
  for (StateIndex x = 0; x < model.n_states(); ++x) {
    const std::string s = format_double(model.s_grid[model.endogenous(x)]);
    const std::string z = format_double(model.z_grid[model.exogenous(x)]);
    values += s + "," + z + "," + format_double(report.fixed_point[x]) + "," +
              format_double(original[x]) + "\n";
    policy += s + "," + z + "," + format_double(model.a_grid[report.policy[x]]) + "\n";
  }
  std::string diag = "iteration,residual,contraction_estimate\n";
  const std::string rate = format_double(report.contraction_estimate);
  for (std::size_t i = 0; i < report.residuals.size(); ++i) {
    diag += std::to_string(i + 1) + "," + format_double(report.residuals[i]) + "," + rate + "\n";
  }
  write_file(dir / "values.csv", values);
  write_file(dir / "policy.csv", policy);
  write_file(dir / "diagnostics.csv", diag);
}

}  // namespace recurdp
