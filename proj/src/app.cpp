// src/app.cpp

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

#include "geoforge/app.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "geoforge/descriptor.hpp"
#include "geoforge/io.hpp"
#include "geoforge/protocol.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;

namespace geoforge {
namespace {

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string zeta_file_name(int dim, const ZetaSpec& s) {
  return fmt("zeta_d%d_%.6g_%.6g_n%d_s%lld_seed%llu_v%d.csv", dim, s.sigma_min, s.sigma_max, s.nodes, s.samples,
             static_cast<unsigned long long>(s.seed), ZetaTable::kVersion);
}

bool table_matches(const ZetaTable& t, int dim, const ZetaSpec& s) {
  const std::vector<double> grid = log_spaced_grid(s.sigma_min, s.sigma_max, s.nodes);
  const auto have = t.sigma_grid();
  return t.dim() == dim && t.mc_samples() == s.samples && t.seed() == s.seed &&
         std::equal(have.begin(), have.end(), grid.begin(), grid.end());
}

ZetaTable build_table(int dim, const ZetaSpec& spec, int jobs) {
  ZetaBuildOptions options;
  options.jobs = jobs;
  return build_zeta_table(dim, log_spaced_grid(spec.sigma_min, spec.sigma_max, spec.nodes), spec.samples, spec.seed,
                          options);
}

std::string table_csv(const ZetaTable& table) {
  std::ostringstream os;
  write_zeta_csv(table, os);
  return os.str();
}

int cmd_zeta(int dim, const ZetaSpec& spec, const std::string& out_path, int jobs, std::ostream& err) {
  err << fmt("stage=zeta dim=%d nodes=%d samples=%lld seed=%llu\n", dim, spec.nodes, spec.samples,
             static_cast<unsigned long long>(spec.seed));
  const ZetaTable table = build_table(dim, spec, jobs);
  write_text_file(out_path, table_csv(table));
  err << "stage=zeta wrote=" << out_path << '\n';
  return kExitOk;
}

RunConfig resolve_config(const std::string& path) {
  if (fs::path(path).extension() == ".json") {
    const nlohmann::json manifest = read_json_file(path);
    if (!manifest.is_object() || manifest.value("kind", "") != "manifest" || !manifest.contains("config_ini"))
      throw Error(Errc::kConfig, path + " is not a run manifest");
    return parse_run_config(manifest.at("config_ini").get<std::string>());
  }
  return load_run_config(path);
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_override,
            int jobs, std::ostream& err) {
  RunConfig config = resolve_config(config_path);
  if (seed) config.experiment.seed = *seed;
  if (!out_override.empty()) config.output = out_override;
  config.experiment.test.jobs = jobs;
  ExperimentConfig& e = config.experiment;

  Corpus dev, test;
  const bool cross = e.protocol == "cross";
  int dim = kChannels;
  if (config.source == "synthetic") {
    dim = config.synthetic.dim;
    Rng a = derive_stream(e.seed, {100}), b = derive_stream(e.seed, {101});
    err << fmt("stage=source kind=synthetic writers=%d\n", config.synthetic.writers);
    dev = synthetic_corpus(config.synthetic, cross ? "synthetic-A" : "synthetic", a, e.mh);
    if (cross) test = synthetic_corpus(config.synthetic, "synthetic-B", b, e.mh);
  } else {
    err << "stage=source kind=directory path=" << config.datasets[0] << '\n';
    dev = load_corpus(config.datasets[0], jobs);
    if (cross) test = load_corpus(config.datasets[1], jobs);
  }

  const ZetaTable table = cached_zeta_table(dim, config.zeta, jobs, err);
  const ExperimentReport report = run_experiment(e, dev, cross ? &test : nullptr, table,
                                                 [&err](const std::string& line) { err << line << '\n'; });

  const fs::path out_dir = config.output;
  fs::create_directories(out_dir / "models");
  write_text_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  std::ostringstream curve, averaged;
  write_eer_curve_csv(report, curve);
  write_averaged_csv(report, averaged);
  write_text_file(out_dir / "eer_curve.csv", curve.str());
  write_text_file(out_dir / "averaged.csv", averaged.str());
  std::vector<std::string> outputs{"report.json", "eer_curve.csv", "averaged.csv"};
  for (const FoldResult& f : report.folds) {
    const std::string stem = fmt("models/fold%03d", f.id);
    write_text_file(out_dir / (stem + "_rgmm.json"), rgmm_to_json(f.model).dump(2) + "\n");
    write_text_file(out_dir / (stem + "_metric.json"), metric_to_json(f.metric).dump(2) + "\n");
    outputs.push_back(stem + "_rgmm.json");
    outputs.push_back(stem + "_metric.json");
  }
  nlohmann::json manifest{
      {"kind", "manifest"},
      {"version", 1},
      {"tool", "geoforge"},
      {"tool_version", kToolVersion},
      {"report_version", kReportVersion},
      {"zeta_version", ZetaTable::kVersion},
      {"source", report.synthetic ? kSyntheticSourceFlag : "images"},
      {"seeds", {{"run", e.seed}, {"zeta", config.zeta.seed}}},
      {"zeta_table", zeta_file_name(dim, config.zeta)},
      {"config_ini", to_ini(config)},
      {"outputs", outputs}};
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  err << "stage=done output=" << out_dir.string() << '\n';
  return kExitOk;
}

void inspect_model(const RgmmModel& model, std::ostream& out) {
  out << "rgmm dim=" << model.dim << " K=" << model.K() << '\n';
  out << "component  weight        sigma\n";
  double total = 0.0;
  for (int i = 0; i < model.K(); ++i) {
    const MixtureComponent& c = model.components[i];
    total += c.weight;
    out << fmt("%9d  %.10f  %.10f\n", i, c.weight, c.params.sigma);
  }
  out << fmt("weight_sum %.10f\n", total);
  out << "center_rao_distances\n";
  for (int i = 0; i < model.K(); ++i) {
    for (int j = 0; j < model.K(); ++j)
      out << (j ? " " : "")
          << fmt("%.6f", rao_distance(model.components[i].params.center, model.components[j].params.center));
    out << '\n';
  }
}

void inspect_report(const nlohmann::json& j, std::ostream& out) {
  out << "report protocol=" << j.at("protocol").get<std::string>() << " source=" << j.at("source").get<std::string>()
      << '\n';
  out << "g";
  for (const nlohmann::json& c : j.at("combos")) out << fmt(" K=%d,a=%g", c.at("K").get<int>(), c.at("a").get<double>());
  out << '\n';
  for (int g = 0; g < kPyramidRegions; ++g) {
    out << g + 1;
    for (const nlohmann::json& c : j.at("combos")) out << ' ' << format_number(c.at("averaged").at(g).get<double>());
    out << '\n';
  }
}

int cmd_inspect(const std::string& path, std::ostream& out) {
  try {
    const nlohmann::json j = read_json_file(path);
    const std::string kind = j.is_object() ? j.value("kind", "") : "";
    if (kind == "rgmm") {
      inspect_model(rgmm_from_json(j), out);
    } else if (kind == "metric") {
      const MetricModel m = metric_from_json(j);
      out << "metric d=" << m.d << " m=" << m.m << " q=" << m.q << '\n';
      for (int c = 0; c < m.m; ++c) out << fmt("block %d alpha=%g beta=%g\n", c, m.A[c].alpha, m.A[c].beta);
      out << fmt("threshold %.10g\n", m.threshold);
    } else if (kind == "report") {
      inspect_report(j, out);
    } else if (kind == "manifest") {
      out << j.at("config_ini").get<std::string>();
    } else {
      throw Error(Errc::kFormat, "unrecognized document kind '" + kind + "'");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::kIo) throw;
    throw Error(Errc::kConfig, path + ": " + e.detail());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kConfig, path + ": " + e.what());
  }
  return kExitOk;
}

int cmd_descriptors(const std::string& dir, const std::string& out_path, int min_pixels, int jobs,
                    std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) throw Error(Errc::kIo, "image directory not found: " + dir);
  std::vector<fs::path> files;
  for (const fs::directory_entry& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::string> chunks(files.size());
  detail::parallel_for(files.size(), jobs, [&](std::size_t k) {
    std::ostringstream os;
    try {
      write_pyramid_jsonl(fs::relative(files[k], dir).generic_string(),
                          image_to_pyramid(read_image(files[k]), min_pixels), os);
    } catch (const Error& e) {
      throw Error(e.code(), files[k].string() + ": " + e.detail());
    }
    chunks[k] = os.str();
  });
  std::string all;
  for (const std::string& c : chunks) all += c;
  if (out_path.empty() || out_path == "-") out << all;
  else write_text_file(out_path, all);
  err << "stage=descriptors images=" << files.size() << '\n';
  return kExitOk;
}

}  // namespace

int exit_code(Errc code) {
  switch (code) {
    case Errc::kConfig:
    case Errc::kInvalidArgument:
    case Errc::kNonPositiveAlphaBeta:
      return kExitConfig;
    case Errc::kIo:
    case Errc::kFormat:
    case Errc::kBlankImage:
    case Errc::kTooFewInkPixels:
    case Errc::kTooFewWriters:
    case Errc::kInsufficientGenuine:
    case Errc::kEmptyClass:
    case Errc::kEmptySimilarClass:
    case Errc::kRequestedMoreThanAvailable:
    case Errc::kDimensionMismatch:
    case Errc::kTooFewPoints:
      return kExitData;
    default:
      return kExitNumeric;
  }
}

fs::path zeta_cache_dir(const std::string& configured) {
  if (const char* env = std::getenv("GEOFORGE_CACHE"); env && *env) return env;
  if (!configured.empty()) return configured;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "geoforge";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "geoforge";
  return fs::path(".geoforge-cache");
}

ZetaTable cached_zeta_table(int dim, const ZetaSpec& spec, int jobs, std::ostream& err) {
  const fs::path dir = zeta_cache_dir(spec.cache);
  const fs::path file = dir / zeta_file_name(dim, spec);
  if (std::ifstream in(file); in) {
    try {
      ZetaTable t = read_zeta_csv(in, dim);
      if (table_matches(t, dim, spec)) {
        err << "stage=zeta cache=hit file=" << file.string() << '\n';
        return t;
      }
    } catch (const Error&) {
    }
    err << "stage=zeta cache=stale file=" << file.string() << '\n';
  }
  err << fmt("stage=zeta cache=miss dim=%d nodes=%d samples=%lld\n", dim, spec.nodes, spec.samples);
  ZetaTable table = build_table(dim, spec, jobs);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = file.string() + ".tmp";
  try {
    write_text_file(tmp, table_csv(table));
    fs::rename(tmp, file, ec);
  } catch (const Error& e) {
    err << "stage=zeta cache=unwritable " << e.detail() << '\n';
  }
  return table;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasi-synthetic SPD data generation and writer-independent signature verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  int jobs = default_jobs();
  CLI::App* zeta = app.add_subcommand("zeta", "Build a normalizing-constant table and write it as CSV");
  int dim = 10;
  ZetaSpec spec;
  std::string zeta_out;
  zeta->add_option("--dim", dim, "Matrix dimension")->required()->check(CLI::PositiveNumber);
  zeta->add_option("--sigma-min", spec.sigma_min, "Smallest sigma node")->capture_default_str();
  zeta->add_option("--sigma-max", spec.sigma_max, "Largest sigma node")->capture_default_str();
  zeta->add_option("--nodes", spec.nodes, "Number of log-spaced nodes")->capture_default_str();
  zeta->add_option("--samples", spec.samples, "Monte Carlo samples per node")->capture_default_str();
  zeta->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  zeta->add_option("--out", zeta_out, "Output CSV path")->required();
  zeta->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* run = app.add_subcommand("run", "Run an experiment from an INI config or a manifest");
  std::string config_path, run_out;
  std::optional<std::uint64_t> seed;
  run->add_option("config", config_path, "INI configuration or manifest.json")->required();
  run->add_option("--seed", seed, "Override run.seed");
  run->add_option("--out", run_out, "Override run.output");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* inspect = app.add_subcommand("inspect", "Summarize a model, metric, report or manifest JSON file");
  std::string inspect_path;
  inspect->add_option("file", inspect_path, "JSON file")->required();

  CLI::App* desc = app.add_subcommand("descriptors", "Dump pyramid descriptors for a directory of PGM images");
  std::string desc_dir, desc_out;
  int min_pixels = kMinRegionPixels;
  desc->add_option("dir", desc_dir, "Image directory (searched recursively)")->required();
  desc->add_option("--out", desc_out, "Output JSON lines file (default stdout)");
  desc->add_option("--min-pixels", min_pixels, "Ink pixels needed per region")->capture_default_str();
  desc->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*zeta) return cmd_zeta(dim, spec, zeta_out, jobs, err);
    if (*run) return cmd_run(config_path, seed, run_out, jobs, err);
    if (*inspect) return cmd_inspect(inspect_path, out);
    if (*desc) return cmd_descriptors(desc_dir, desc_out, min_pixels, jobs, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace geoforge
