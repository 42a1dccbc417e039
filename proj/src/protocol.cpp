// src/protocol.cpp

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

#include "geoforge/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include "geoforge/error.hpp"
#include "geoforge/roc.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;

namespace geoforge {
namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".pgm"))
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

PyramidDescriptors simulated_pyramid(std::span<const SpdMatrix> draws) {
  PyramidDescriptors p;
  p.regions.assign(draws.begin(), draws.end());
  p.fallback.assign(draws.size(), false);
  return p;
}

std::vector<PyramidDescriptors> simulated_samples(const RgdParams& params, int count, Rng& rng,
                                                  const MhConfig& mh) {
  const std::vector<SpdMatrix> draws = sample_rgd(params, count * kPyramidRegions, rng, mh);
  std::vector<PyramidDescriptors> out;
  for (int s = 0; s < count; ++s)
    out.push_back(simulated_pyramid(std::span(draws).subspan(static_cast<std::size_t>(s) * kPyramidRegions,
                                                             kPyramidRegions)));
  return out;
}

bool identity_projection(const MetricModel& model) {
  return model.m == 1 && model.W.size() == 1 && model.W[0].rows() == model.W[0].cols() &&
         model.W[0].isIdentity(0.0);
}

template <class Fn>
auto with_context(const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.detail());
  }
}

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (std::uint64_t t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

Corpus load_corpus(const fs::path& root, int jobs) {
  if (!fs::is_directory(root)) throw Error(Errc::kIo, "dataset directory not found: " + root.string());
  Corpus corpus;
  corpus.name = root.filename().empty() ? root.parent_path().filename().string() : root.filename().string();
  struct Job {
    std::size_t writer;
    bool genuine;
    fs::path path;
  };
  std::vector<Job> jobs_list;
  for (const fs::path& dir : sorted_entries(root, true)) {
    WriterSamples w;
    w.id = dir.filename().string();
    const std::size_t index = corpus.writers.size();
    for (bool genuine : {true, false}) {
      const fs::path sub = dir / (genuine ? "genuine" : "forgery");
      if (!fs::is_directory(sub)) throw Error(Errc::kIo, "missing directory " + sub.string());
      for (const fs::path& file : sorted_entries(sub, false)) jobs_list.push_back({index, genuine, file});
    }
    corpus.writers.push_back(std::move(w));
  }
  if (corpus.writers.empty()) throw Error(Errc::kIo, "no writer directories under " + root.string());

  std::vector<std::optional<PyramidDescriptors>> pyramids(jobs_list.size());
  detail::parallel_for(jobs_list.size(), jobs, [&](std::size_t k) {
    pyramids[k] = with_context(jobs_list[k].path.string(), [&] { return image_to_pyramid(read_image(jobs_list[k].path)); });
  });
  for (std::size_t k = 0; k < jobs_list.size(); ++k) {
    WriterSamples& w = corpus.writers[jobs_list[k].writer];
    (jobs_list[k].genuine ? w.genuine : w.forgery).push_back(std::move(*pyramids[k]));
  }
  return corpus;
}

Corpus synthetic_corpus(const SyntheticSourceConfig& config, const std::string& name, Rng& rng,
                        const MhConfig& mh) {
  if (config.dim < 1 || config.population_centers < 1 || config.writers < 1 || config.genuine < 1 ||
      config.forgery < 1)
    throw Error(Errc::kConfig, "synthetic source sizes must be positive");
  if (!(config.sigma_min > 0.0) || config.sigma_max < config.sigma_min || !(config.a_test > 1.0) ||
      !(config.writer_spread > 0.0) || !(config.population_spread >= 0.0))
    throw Error(Errc::kConfig, "synthetic source needs 0 < sigma_min <= sigma_max, a_test > 1, spreads > 0");
  const int d = config.dim;
  std::normal_distribution<double> normal;
  std::vector<SpdMatrix> planted;
  for (int i = 0; i < config.population_centers; ++i) {
    Matrix g(d, d);
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = normal(rng);
    Matrix s = 0.5 * (g + g.transpose());
    s *= config.population_spread / std::max(s.norm(), 1e-300);
    planted.push_back(tangent_exp(TangentSymmetric::from_symmetric(s)));
  }

  Corpus corpus;
  corpus.name = name;
  corpus.synthetic = true;
  std::uniform_int_distribution<int> pick(0, config.population_centers - 1);
  std::uniform_real_distribution<double> sigma_dist(config.sigma_min, config.sigma_max);
  for (int w = 0; w < config.writers; ++w) {
    Rng stream = split_stream(rng);
    const int i = pick(stream);
    const SpdMatrix center = sample_rgd(RgdParams(planted[i], config.writer_spread), 1, stream, mh).front();
    const double sigma = sigma_dist(stream);
    WriterSamples ws;
    ws.id = format("w%03d", w);
    ws.genuine = simulated_samples(RgdParams(center, sigma), config.genuine, stream, mh);
    ws.forgery = simulated_samples(RgdParams(center, config.a_test * sigma), config.forgery, stream, mh);
    corpus.writers.push_back(std::move(ws));
  }
  return corpus;
}

SplitPlan make_intra_splits(const Corpus& corpus, int repetitions, Rng& rng) {
  const int n = static_cast<int>(corpus.writers.size());
  if (n < 2) throw Error(Errc::kTooFewWriters, "intra protocol needs at least 2 writers, got " + std::to_string(n));
  if (repetitions < 1) throw Error(Errc::kConfig, "split repetitions must be positive");
  SplitPlan plan;
  plan.protocol = "intra";
  plan.repetitions = repetitions;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int r = 0; r < repetitions; ++r) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> first(order.begin(), order.begin() + n / 2), second(order.begin() + n / 2, order.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    plan.folds.push_back({first, second, r, 0});
    plan.folds.push_back({second, first, r, 1});
  }
  return plan;
}

SplitPlan make_cross_splits(const Corpus& dev, const Corpus& test) {
  if (dev.writers.empty() || test.writers.empty())
    throw Error(Errc::kTooFewWriters, "cross protocol needs writers in both corpora");
  SplitPlan plan;
  plan.protocol = "cross";
  plan.repetitions = 1;
  Fold f;
  f.dev.resize(dev.writers.size());
  f.test.resize(test.writers.size());
  std::iota(f.dev.begin(), f.dev.end(), 0);
  std::iota(f.test.begin(), f.test.end(), 0);
  plan.folds.push_back(std::move(f));
  return plan;
}

std::vector<SpdMatrix> build_dev_set(const Corpus& corpus, std::span<const int> writers, int D, Rng& rng) {
  if (D < 1) throw Error(Errc::kConfig, "D must be positive");
  std::vector<SpdMatrix> out;
  for (int w : writers) {
    const WriterSamples& ws = corpus.writers.at(w);
    const int n = static_cast<int>(ws.genuine.size());
    if (n < D)
      throw Error(Errc::kInsufficientGenuine,
                  "writer " + ws.id + " has " + std::to_string(n) + " genuine samples, " + std::to_string(D) + " required");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int k = 0; k < D; ++k) out.push_back(ws.genuine[idx[k]].regions.front());
  }
  return out;
}

Curve score_pair(const MetricModel& model, const PyramidDescriptors& r, const PyramidDescriptors& q) {
  if (r.regions.size() != kPyramidRegions || q.regions.size() != kPyramidRegions)
    throw Error(Errc::kDimensionMismatch, "pyramids must hold 14 regions");
  Curve out;
  for (int g = 0; g < kPyramidRegions; ++g) out[g] = delta_distance(model, r.regions[g], q.regions[g]);
  return out;
}

std::vector<double> rearrange_scores(std::span<const double> delta) {
  std::vector<double> out(delta.begin(), delta.end());
  std::sort(out.begin(), out.end());
  double sum = 0.0;
  for (std::size_t g = 0; g < out.size(); ++g) {
    sum += out[g];
    out[g] = sum / static_cast<double>(g + 1);
  }
  return out;
}

ScoreTensor::ScoreTensor(int q, int r, int g)
    : questioned(q), references(r), regions(g),
      values(static_cast<std::size_t>(q) * r * g, 0.0), genuine(q, false) {}

Matrix aggregate_min_over_refs(const ScoreTensor& t) {
  if (t.references < 1) throw Error(Errc::kInvalidArgument, "score tensor has no references");
  Matrix out(t.questioned, t.regions);
  for (int q = 0; q < t.questioned; ++q)
    for (int g = 0; g < t.regions; ++g) {
      double m = t.at(q, 0, g);
      for (int r = 1; r < t.references; ++r) m = std::min(m, t.at(q, r, g));
      out(q, g) = m;
    }
  return out;
}

struct SpectraCache::WriterEntry {
  std::once_flag once;
  int n_all = 0;
  std::vector<Vector> spectra;
};

SpectraCache::SpectraCache(const Corpus& corpus) : corpus_(corpus) {
  for (std::size_t w = 0; w < corpus.writers.size(); ++w) entries_.push_back(std::make_unique<WriterEntry>());
}

SpectraCache::~SpectraCache() = default;

const Vector& SpectraCache::spectrum(int writer, int i, int j, int g) {
  WriterEntry& e = *entries_.at(writer);
  std::call_once(e.once, [&] {
    const WriterSamples& ws = corpus_.writers[writer];
    const int n_gen = static_cast<int>(ws.genuine.size());
    e.n_all = n_gen + static_cast<int>(ws.forgery.size());
    e.spectra.resize(static_cast<std::size_t>(n_gen) * e.n_all * kPyramidRegions);
    for (int a = 0; a < n_gen; ++a) {
      for (int r = 0; r < kPyramidRegions; ++r) {
        const SpdMatrix& ref = ws.genuine[a].regions.at(r);
        const BasePoint base(ref);
        for (int b = 0; b < e.n_all; ++b) {
          const SpdMatrix& other = b < n_gen ? ws.genuine[b].regions.at(r) : ws.forgery[b - n_gen].regions.at(r);
          Vector& slot = e.spectra[(static_cast<std::size_t>(a) * e.n_all + b) * kPyramidRegions + r];
          // Eigenvalues of (ref, other) are the reciprocals of those of (other, ref).
          slot = ref == other ? Vector::Ones(ref.dim())
                              : Vector(sym_eig(base.whiten(other).matrix()).values.cwiseInverse());
        }
      }
    }
  });
  return e.spectra[(static_cast<std::size_t>(i) * e.n_all + j) * kPyramidRegions + g];
}

std::vector<WriterCurve> run_test_stage(const MetricModel& model, const Corpus& corpus,
                                        std::span<const int> writers, const TestStageConfig& config,
                                        Rng& rng, SpectraCache* cache) {
  if (config.repetitions < 1 || config.references < 1)
    throw Error(Errc::kConfig, "test repetitions and references must be positive");
  if (cache && &cache->corpus() != &corpus) throw Error(Errc::kInvalidArgument, "spectra cache built for another corpus");
  const bool use_cache = cache && identity_projection(model);
  for (int w : writers) {
    const WriterSamples& ws = corpus.writers.at(w);
    if (static_cast<int>(ws.genuine.size()) <= config.references)
      throw Error(Errc::kInsufficientGenuine, "writer " + ws.id + " has " + std::to_string(ws.genuine.size()) +
                                                  " genuine samples, more than " +
                                                  std::to_string(config.references) + " required");
    if (ws.forgery.empty()) throw Error(Errc::kEmptyClass, "writer " + ws.id + " has no forgeries");
  }
  const std::uint64_t base = rng();
  std::vector<Rng> streams;
  for (int w : writers) streams.push_back(derive_stream(base, {static_cast<std::uint64_t>(w)}));

  std::vector<WriterCurve> out(writers.size());
  detail::parallel_for(writers.size(), config.jobs, [&](std::size_t k) {
    const int w = writers[k];
    const WriterSamples& ws = corpus.writers[w];
    const int n_gen = static_cast<int>(ws.genuine.size()), n_forg = static_cast<int>(ws.forgery.size());
    const int n_q = n_gen - config.references + n_forg;
    WriterCurve& wc = out[k];
    wc.writer = ws.id;
    std::vector<int> order(n_gen);
    std::iota(order.begin(), order.end(), 0);
    for (int rep = 0; rep < config.repetitions; ++rep) {
      std::shuffle(order.begin(), order.end(), streams[k]);
      std::vector<int> questioned(order.begin() + config.references, order.end());
      std::sort(questioned.begin(), questioned.end());
      for (int f = 0; f < n_forg; ++f) questioned.push_back(n_gen + f);

      ScoreTensor tensor(n_q, config.references);
      for (int q = 0; q < n_q; ++q) {
        const int j = questioned[q];
        tensor.genuine[q] = j < n_gen;
        const PyramidDescriptors& qp = j < n_gen ? ws.genuine[j] : ws.forgery[j - n_gen];
        for (int r = 0; r < config.references; ++r) {
          const int i = order[r];
          Curve delta;
          if (use_cache) {
            for (int g = 0; g < kPyramidRegions; ++g)
              delta[g] = delta_from_spectra(model, std::span(&cache->spectrum(w, i, j, g), 1));
          } else {
            delta = score_pair(model, ws.genuine[i], qp);
          }
          const std::vector<double> sorted = rearrange_scores(delta);
          for (int g = 0; g < kPyramidRegions; ++g) tensor.at(q, r, g) = sorted[g];
        }
      }
      const Matrix sc = aggregate_min_over_refs(tensor);
      Curve curve;
      std::vector<double> pos, neg;
      for (int g = 0; g < kPyramidRegions; ++g) {
        pos.clear();
        neg.clear();
        for (int q = 0; q < n_q; ++q) (tensor.genuine[q] ? pos : neg).push_back(sc(q, g));
        curve[g] = eer(pos, neg).eer_percent;
      }
      wc.repetitions.push_back(curve);
    }
    for (int g = 0; g < kPyramidRegions; ++g) {
      double s = 0.0;
      for (const Curve& c : wc.repetitions) s += c[g];
      wc.mean[g] = s / static_cast<double>(wc.repetitions.size());
    }
  });
  return out;
}

Curve mean_curve(std::span<const WriterCurve> writers) {
  if (writers.empty()) throw Error(Errc::kEmptyClass, "no writers to average");
  Curve out{};
  for (const WriterCurve& w : writers)
    for (int g = 0; g < kPyramidRegions; ++g) out[g] += w.mean[g];
  for (double& v : out) v /= static_cast<double>(writers.size());
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const Corpus& dev, const Corpus* test,
                                const ZetaTable& table, const ProgressSink& progress) {
  const bool cross = config.protocol == "cross";
  if (!cross && config.protocol != "intra")
    throw Error(Errc::kConfig, "protocol must be 'intra' or 'cross', got '" + config.protocol + "'");
  if (cross != (test != nullptr))
    throw Error(Errc::kConfig, cross ? "cross protocol needs a testing corpus" : "intra protocol takes one corpus");
  if (config.K.empty() || config.a.empty()) throw Error(Errc::kConfig, "K and a lists must be nonempty");
  for (std::size_t i = 0; i < config.K.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (config.K[i] == config.K[j]) throw Error(Errc::kConfig, "K list has duplicates");
  for (std::size_t i = 0; i < config.a.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (config.a[i] == config.a[j]) throw Error(Errc::kConfig, "a list has duplicates");
  auto log = [&](const std::string& line) {
    if (progress) progress(line);
  };

  const Corpus& test_corpus = cross ? *test : dev;
  Rng split_rng = derive_stream(config.seed, {1});
  const SplitPlan plan = cross ? make_cross_splits(dev, test_corpus)
                               : make_intra_splits(dev, config.split_repetitions, split_rng);
  SpectraCache cache(test_corpus);

  ExperimentReport report;
  report.protocol = plan.protocol;
  report.dev_corpus = dev.name;
  report.test_corpus = test_corpus.name;
  report.synthetic = dev.synthetic || test_corpus.synthetic;
  report.config = config;

  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const Fold& fold = plan.folds[f];
    const std::string fold_tag = "fold=" + std::to_string(f);
    Rng dev_rng = derive_stream(config.seed, {2, f});
    const std::vector<SpdMatrix> points =
        with_context("stage=dev " + fold_tag, [&] { return build_dev_set(dev, fold.dev, config.D, dev_rng); });
    const int dim = static_cast<int>(points.front().dim());
    if (dim != table.dim())
      throw Error(Errc::kDimensionMismatch, "zeta table dimension " + std::to_string(table.dim()) +
                                                " differs from descriptor dimension " + std::to_string(dim));
    log(format("stage=dev fold=%zu points=%zu", f, points.size()));

    for (int K : config.K) {
      const std::string k_tag = fold_tag + " K=" + std::to_string(K);
      FitConfig fit_config = config.fit;
      fit_config.progress = [&](int restart, int iter, double ll) {
        log(format("stage=fit fold=%zu K=%d restart=%d iter=%d ll=%.6f", f, K, restart, iter, ll));
      };
      Rng fit_rng = derive_stream(config.seed, {3, f, static_cast<std::uint64_t>(K)});
      auto [model, fit_report] =
          with_context("stage=fit " + k_tag, [&] { return fit(points, K, fit_config, fit_rng, table); });

      for (std::size_t ai = 0; ai < config.a.size(); ++ai) {
        const double a = config.a[ai];
        const std::string tag = k_tag + format(" a=%g", a);
        Rng pop_rng = derive_stream(config.seed, {4, f, static_cast<std::uint64_t>(K), ai});
        const PairBatch pairs = with_context("stage=synth " + tag, [&] {
          const SynthPopulation pop = generate_population(model, {config.L, a}, pop_rng, &table, config.mh);
          return build_pairs(pop, config.pairs, pop_rng);
        });
        Rng train_rng = derive_stream(config.seed, {5, f, static_cast<std::uint64_t>(K), ai});
        auto [metric, train_report] =
            with_context("stage=train " + tag, [&] { return train_metric(pairs, dim, config.train, train_rng); });
        log(format("stage=train fold=%zu K=%d a=%g alpha=%g beta=%g val_eer=%.4f", f, K, a,
                   train_report.best.alpha, train_report.best.beta, train_report.validation_eer));

        Rng test_rng = derive_stream(config.seed, {6, f, static_cast<std::uint64_t>(K), ai});
        FoldResult fr;
        fr.writers = with_context("stage=test " + tag, [&] {
          return run_test_stage(metric, test_corpus, fold.test, config.test, test_rng, &cache);
        });
        fr.id = static_cast<int>(report.folds.size());
        fr.repetition = fold.repetition;
        fr.role = fold.role;
        fr.K = K;
        fr.a = a;
        for (int w : fold.dev) fr.dev_writers.push_back(dev.writers[w].id);
        for (int w : fold.test) fr.test_writers.push_back(test_corpus.writers[w].id);
        fr.model = model;
        fr.fit_iterations = fit_report.iterations;
        fr.fit_converged = fit_report.converged;
        fr.fit_loglik = fit_report.loglik_trace.empty() ? 0.0 : fit_report.loglik_trace.back();
        fr.train = train_report;
        fr.metric = metric;
        fr.curve = mean_curve(fr.writers);
        const auto best = std::min_element(fr.curve.begin(), fr.curve.end());
        log(format("stage=test fold=%zu K=%d a=%g best_g=%td eer=%.4f", f, K, a, best - fr.curve.begin() + 1, *best));
        report.folds.push_back(std::move(fr));
      }
    }
  }

  for (int K : config.K) {
    for (double a : config.a) {
      ComboResult combo;
      combo.K = K;
      combo.a = a;
      for (int r = 0; r < plan.repetitions; ++r) {
        Curve rep{};
        int n = 0;
        for (const FoldResult& fr : report.folds) {
          if (fr.K != K || fr.a != a || fr.repetition != r) continue;
          combo.fold_ids.push_back(fr.id);
          for (int g = 0; g < kPyramidRegions; ++g) rep[g] += fr.curve[g];
          ++n;
        }
        for (double& v : rep) v /= n;
        combo.repetition_curves.push_back(rep);
      }
      for (const Curve& c : combo.repetition_curves)
        for (int g = 0; g < kPyramidRegions; ++g) combo.averaged[g] += c[g];
      for (double& v : combo.averaged) v /= static_cast<double>(combo.repetition_curves.size());
      report.combos.push_back(std::move(combo));
    }
  }
  return report;
}

}  // namespace geoforge
