// src/config.cpp

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

#include "geoforge/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

struct Field {
  const char* section;
  const char* key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("not a number: '" + t + "'");
  return value;
}

std::string show(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string show_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += show(v[i]);
    else if constexpr (std::is_same_v<T, std::string>) out += v[i];
    else out += std::to_string(v[i]);
  }
  return out;
}

Field int_field(const char* s, const char* k, int& ref) {
  return {s, k, [&ref](const std::string& v) { ref = parse_number<int>(v); }, [&ref] { return std::to_string(ref); }};
}
Field ll_field(const char* s, const char* k, long long& ref) {
  return {s, k, [&ref](const std::string& v) { ref = parse_number<long long>(v); }, [&ref] { return std::to_string(ref); }};
}
Field u64_field(const char* s, const char* k, std::uint64_t& ref) {
  return {s, k, [&ref](const std::string& v) { ref = parse_number<std::uint64_t>(v); }, [&ref] { return std::to_string(ref); }};
}
Field double_field(const char* s, const char* k, double& ref) {
  return {s, k, [&ref](const std::string& v) { ref = parse_number<double>(v); }, [&ref] { return show(ref); }};
}
Field string_field(const char* s, const char* k, std::string& ref) {
  return {s, k, [&ref](const std::string& v) { ref = trim(v); }, [&ref] { return ref; }};
}

std::vector<Field> fields(RunConfig& c) {
  ExperimentConfig& e = c.experiment;
  SyntheticSourceConfig& s = c.synthetic;
  return {
      string_field("run", "protocol", e.protocol),
      u64_field("run", "seed", e.seed),
      string_field("run", "output", c.output),
      string_field("source", "kind", c.source),
      {"source", "datasets",
       [&c](const std::string& v) { c.datasets = split_list(v); }, [&c] { return show_list(c.datasets); }},
      int_field("source", "dim", s.dim),
      int_field("source", "population_centers", s.population_centers),
      double_field("source", "population_spread", s.population_spread),
      double_field("source", "writer_spread", s.writer_spread),
      double_field("source", "sigma_min", s.sigma_min),
      double_field("source", "sigma_max", s.sigma_max),
      int_field("source", "writers", s.writers),
      int_field("source", "genuine", s.genuine),
      int_field("source", "forgery", s.forgery),
      double_field("source", "a_test", s.a_test),
      int_field("protocol", "D", e.D),
      int_field("protocol", "split_repetitions", e.split_repetitions),
      int_field("protocol", "test_repetitions", e.test.repetitions),
      int_field("protocol", "references", e.test.references),
      {"model", "K",
       [&e](const std::string& v) {
         e.K.clear();
         for (const std::string& item : split_list(v)) e.K.push_back(parse_number<int>(item));
       },
       [&e] { return show_list(e.K); }},
      double_field("model", "tol", e.fit.tol),
      int_field("model", "max_iter", e.fit.max_iter),
      int_field("model", "restarts", e.fit.restarts),
      double_field("model", "karcher_tol", e.fit.karcher.tol),
      int_field("model", "karcher_max_iter", e.fit.karcher.max_iter),
      int_field("synth", "L", e.L),
      {"synth", "a",
       [&e](const std::string& v) {
         e.a.clear();
         for (const std::string& item : split_list(v)) e.a.push_back(parse_forgery_scale(item));
       },
       [&e] { return show_list(e.a); }},
      {"synth", "pairs",
       [&e](const std::string& v) {
         const std::string t = trim(v);
         if (t == "all") {
           e.pairs = {PairSpec::Mode::kAll, 0};
         } else if (t.rfind("sampled:", 0) == 0) {
           e.pairs = {PairSpec::Mode::kSampled, parse_number<int>(t.substr(8))};
         } else {
           throw std::invalid_argument("expected 'all' or 'sampled:N'");
         }
       },
       [&e] {
         return e.pairs.mode == PairSpec::Mode::kAll ? std::string("all")
                                                     : "sampled:" + std::to_string(e.pairs.n_per_class);
       }},
      double_field("metric", "grid_min", e.train.grid_min),
      double_field("metric", "grid_max", e.train.grid_max),
      double_field("metric", "grid_step", e.train.grid_step),
      {"metric", "objective",
       [&e](const std::string& v) {
         const std::string t = trim(v);
         if (t == "eer") e.train.objective = TrainConfig::Objective::kEer;
         else if (t == "auc") e.train.objective = TrainConfig::Objective::kAuc;
         else throw std::invalid_argument("expected 'eer' or 'auc'");
       },
       [&e] { return std::string(e.train.objective == TrainConfig::Objective::kEer ? "eer" : "auc"); }},
      double_field("metric", "validation_fraction", e.train.validation_fraction),
      double_field("zeta", "sigma_min", c.zeta.sigma_min),
      double_field("zeta", "sigma_max", c.zeta.sigma_max),
      int_field("zeta", "nodes", c.zeta.nodes),
      ll_field("zeta", "samples", c.zeta.samples),
      u64_field("zeta", "seed", c.zeta.seed),
      string_field("zeta", "cache", c.zeta.cache),
      double_field("mh", "step_scale", e.mh.step_scale),
      int_field("mh", "burn_in", e.mh.burn_in),
      int_field("mh", "thin", e.mh.thin),
  };
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::kConfig, what);
}

void validate(const RunConfig& c) {
  const ExperimentConfig& e = c.experiment;
  require(e.protocol == "intra" || e.protocol == "cross", "run.protocol must be 'intra' or 'cross'");
  require(c.source == "synthetic" || c.source == "directory", "source.kind must be 'synthetic' or 'directory'");
  if (c.source == "directory") {
    const std::size_t want = e.protocol == "cross" ? 2 : 1;
    require(c.datasets.size() == want, "source.datasets needs " + std::to_string(want) + " path(s) for " + e.protocol);
  }
  require(!c.output.empty(), "run.output must be set");
  require(e.D >= 1, "protocol.D must be >= 1");
  require(e.split_repetitions >= 1, "protocol.split_repetitions must be >= 1");
  require(e.test.repetitions >= 1, "protocol.test_repetitions must be >= 1");
  require(e.test.references >= 1, "protocol.references must be >= 1");
  require(!e.K.empty(), "model.K must list at least one value");
  for (int k : e.K) require(k >= 1, "model.K entries must be >= 1");
  require(e.fit.tol > 0.0 && e.fit.max_iter >= 1 && e.fit.restarts >= 1, "model.tol, max_iter, restarts must be positive");
  require(e.L >= 2, "synth.L must be >= 2");
  require(!e.a.empty(), "synth.a must list at least one value");
  require(e.pairs.mode == PairSpec::Mode::kAll || e.pairs.n_per_class >= 1, "synth.pairs sample count must be >= 1");
  require(e.train.validation_fraction > 0.0 && e.train.validation_fraction <= 0.5,
          "metric.validation_fraction must lie in (0, 0.5]");
  require(e.train.grid_min > 0.0 && e.train.grid_max <= kAlphaBetaMax && e.train.grid_min <= e.train.grid_max &&
              e.train.grid_step > 0.0,
          "metric grid must satisfy 0 < grid_min <= grid_max <= 4, grid_step > 0");
  require(c.zeta.sigma_min > 0.0 && c.zeta.sigma_min < c.zeta.sigma_max, "zeta sigma range must be 0 < min < max");
  require(c.zeta.nodes >= 32, "zeta.nodes must be >= 32");
  require(c.zeta.samples >= 100000, "zeta.samples must be >= 100000");
  require(e.mh.step_scale > 0.0 && e.mh.burn_in >= 0 && e.mh.thin >= 1, "mh settings out of range");
  const SyntheticSourceConfig& s = c.synthetic;
  if (c.source == "synthetic") {
    require(s.dim >= 1 && s.population_centers >= 1 && s.writers >= 2 && s.genuine >= 1 && s.forgery >= 1,
            "source sizes must be positive (writers >= 2)");
    require(s.sigma_min > 0.0 && s.sigma_min <= s.sigma_max, "source sigma range must be 0 < min <= max");
    require(s.a_test > 1.0, "source.a_test must exceed 1");
    require(s.writer_spread > 0.0 && s.population_spread >= 0.0, "source spreads must be positive");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Errc::kConfig, std::string("malformed configuration: ") + e.what());
  }
  RunConfig config;
  std::vector<Field> table = fields(config);
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty())
      throw Error(Errc::kConfig, "key '" + section + "' outside any section");
    for (const auto& [key, value] : keys) {
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Field& f) { return section == f.section && key == f.key; });
      if (it == table.end()) throw Error(Errc::kConfig, "unknown key " + section + "." + key);
      try {
        it->set(value.data());
      } catch (const Error& e) {
        throw Error(Errc::kConfig, section + "." + key + ": " + e.detail());
      } catch (const std::exception& e) {
        throw Error(Errc::kConfig, section + "." + key + ": " + e.what());
      }
    }
  }
  validate(config);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kConfig, "cannot read configuration " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string to_ini(const RunConfig& config) {
  RunConfig copy = config;
  std::string out, section;
  for (const Field& f : fields(copy)) {
    if (section != f.section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get() + "\n";
  }
  return out;
}

}  // namespace geoforge
