// src/io.cpp

// Copyright 2026  The geoforge Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "geoforge/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::kFormat, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get(const nlohmann::json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kFormat, std::string("field '") + key + "': " + e.what());
  }
}

void require_kind(const nlohmann::json& j, const char* kind) {
  if (get<std::string>(j, "kind") != kind) throw Error(Errc::kFormat, std::string("expected a '") + kind + "' document");
}

nlohmann::json curve_to_json(const Curve& c) { return nlohmann::json(std::vector<double>(c.begin(), c.end())); }

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"protocol", c.protocol},
          {"D", c.D},
          {"K", c.K},
          {"L", c.L},
          {"a", c.a},
          {"split_repetitions", c.split_repetitions},
          {"test_repetitions", c.test.repetitions},
          {"references", c.test.references},
          {"pairs", c.pairs.mode == PairSpec::Mode::kAll ? "all" : "sampled:" + std::to_string(c.pairs.n_per_class)},
          {"grid", {c.train.grid_min, c.train.grid_max, c.train.grid_step}},
          {"objective", c.train.objective == TrainConfig::Objective::kEer ? "eer" : "auc"},
          {"validation_fraction", c.train.validation_fraction},
          {"fit", {{"tol", c.fit.tol}, {"max_iter", c.fit.max_iter}, {"restarts", c.fit.restarts}}},
          {"mh", {{"step_scale", c.mh.step_scale}, {"burn_in", c.mh.burn_in}, {"thin", c.mh.thin}}},
          {"seed", c.seed}};
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw Error(Errc::kFormat, "matrix must be a nonempty array of rows");
  const std::size_t cols = j.front().size();
  Matrix m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw Error(Errc::kFormat, "matrix rows differ in length");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw Error(Errc::kFormat, "matrix entry is not a number");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

nlohmann::json rgmm_to_json(const RgmmModel& model) {
  nlohmann::json comps = nlohmann::json::array();
  for (const MixtureComponent& c : model.components)
    comps.push_back({{"weight", c.weight}, {"sigma", c.params.sigma}, {"center", matrix_to_json(c.params.center.matrix())}});
  return {{"kind", "rgmm"}, {"version", kModelVersion}, {"dim", model.dim}, {"K", model.K()}, {"components", comps}};
}

RgmmModel rgmm_from_json(const nlohmann::json& j) {
  require_kind(j, "rgmm");
  if (get<int>(j, "version") != kModelVersion) throw Error(Errc::kFormat, "unsupported model version");
  RgmmModel model;
  model.dim = get<int>(j, "dim");
  const nlohmann::json& comps = field(j, "components");
  if (!comps.is_array() || comps.empty()) throw Error(Errc::kFormat, "model has no components");
  if (get<int>(j, "K") != static_cast<int>(comps.size())) throw Error(Errc::kFormat, "K differs from component count");
  for (const nlohmann::json& c : comps) {
    const Matrix center = matrix_from_json(field(c, "center"));
    if (center.rows() != model.dim || center.cols() != model.dim)
      throw Error(Errc::kFormat, "center dimension differs from model dim");
    model.components.push_back({get<double>(c, "weight"), RgdParams(validate_spd(center), get<double>(c, "sigma"))});
  }
  return model;
}

nlohmann::json metric_to_json(const MetricModel& model) {
  nlohmann::json w = nlohmann::json::array(), ab = nlohmann::json::array();
  for (const Matrix& m : model.W) w.push_back(matrix_to_json(m));
  for (const AlphaBeta& p : model.A) ab.push_back({p.alpha, p.beta});
  return {{"kind", "metric"}, {"version", kModelVersion}, {"d", model.d}, {"m", model.m}, {"q", model.q},
          {"W", w}, {"alpha_beta", ab}, {"sigma", matrix_to_json(model.sigma)}, {"threshold", model.threshold}};
}

MetricModel metric_from_json(const nlohmann::json& j) {
  require_kind(j, "metric");
  if (get<int>(j, "version") != kModelVersion) throw Error(Errc::kFormat, "unsupported metric version");
  MetricModel model;
  model.d = get<int>(j, "d");
  model.m = get<int>(j, "m");
  model.q = get<int>(j, "q");
  for (const nlohmann::json& w : field(j, "W")) model.W.push_back(matrix_from_json(w));
  for (const nlohmann::json& p : field(j, "alpha_beta")) {
    if (!p.is_array() || p.size() != 2) throw Error(Errc::kFormat, "alpha_beta rows need two entries");
    model.A.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  model.sigma = matrix_from_json(field(j, "sigma"));
  model.threshold = get<double>(j, "threshold");
  check_metric_model(model);
  return model;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldResult& f : report.folds) {
    nlohmann::json writers = nlohmann::json::array();
    for (const WriterCurve& w : f.writers) {
      nlohmann::json reps = nlohmann::json::array();
      for (const Curve& c : w.repetitions) reps.push_back(curve_to_json(c));
      writers.push_back({{"writer", w.writer}, {"mean", curve_to_json(w.mean)}, {"repetitions", reps}});
    }
    nlohmann::json weights = nlohmann::json::array(), sigmas = nlohmann::json::array();
    for (const MixtureComponent& c : f.model.components) {
      weights.push_back(c.weight);
      sigmas.push_back(c.params.sigma);
    }
    folds.push_back({{"fold", f.id},
                     {"repetition", f.repetition},
                     {"role", f.role},
                     {"K", f.K},
                     {"a", f.a},
                     {"dev_writers", f.dev_writers},
                     {"test_writers", f.test_writers},
                     {"fit", {{"iterations", f.fit_iterations}, {"converged", f.fit_converged},
                              {"loglik", f.fit_loglik}, {"weights", weights}, {"sigmas", sigmas}}},
                     {"train", {{"alpha", f.train.best.alpha}, {"beta", f.train.best.beta},
                                {"train_objective", f.train.train_objective},
                                {"validation_auc", f.train.validation_auc},
                                {"validation_eer", f.train.validation_eer},
                                {"threshold", f.train.threshold},
                                {"train_pairs", {f.train.train_similar, f.train.train_dissimilar}},
                                {"validation_pairs", {f.train.validation_similar, f.train.validation_dissimilar}}}},
                     {"curve", curve_to_json(f.curve)},
                     {"writers", writers}});
  }
  nlohmann::json combos = nlohmann::json::array();
  for (const ComboResult& c : report.combos) {
    nlohmann::json reps = nlohmann::json::array();
    for (const Curve& r : c.repetition_curves) reps.push_back(curve_to_json(r));
    combos.push_back({{"K", c.K}, {"a", c.a}, {"folds", c.fold_ids}, {"repetition_curves", reps},
                      {"averaged", curve_to_json(c.averaged)}});
  }
  nlohmann::json out{{"kind", "report"},
                     {"version", kReportVersion},
                     {"protocol", report.protocol},
                     {"dev_corpus", report.dev_corpus},
                     {"test_corpus", report.test_corpus},
                     {"source", report.synthetic ? kSyntheticSourceFlag : "images"},
                     {"config", config_to_json(report.config)},
                     {"averaging", "writer mean within a fold, then role orders, then split repetitions"},
                     {"combos", combos},
                     {"folds", folds}};
  return out;
}

void write_eer_curve_csv(const ExperimentReport& report, std::ostream& out) {
  out << "protocol,fold,writer,g,repetition,eer_percent\n";
  for (const FoldResult& f : report.folds)
    for (const WriterCurve& w : f.writers)
      for (int g = 0; g < kPyramidRegions; ++g)
        for (std::size_t r = 0; r < w.repetitions.size(); ++r)
          out << report.protocol << ',' << f.id << ',' << w.writer << ',' << g + 1 << ',' << r << ','
              << format_number(w.repetitions[r][g]) << '\n';
}

void write_averaged_csv(const ExperimentReport& report, std::ostream& out) {
  out << "protocol,g,K,a,eer_percent\n";
  for (const ComboResult& c : report.combos)
    for (int g = 0; g < kPyramidRegions; ++g) {
      char a[32];
      std::snprintf(a, sizeof a, "%g", c.a);
      out << report.protocol << ',' << g + 1 << ',' << c.K << ',' << a << ',' << format_number(c.averaged[g]) << '\n';
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw Error(Errc::kFormat, path.string() + " is empty");
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kFormat, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

}  // namespace geoforge
