// include/geoforge/protocol.hpp

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

#pragma once

// Writer-independent verification protocol: corpora, development/testing
// splits, reference/questioned scoring with sorted cumulative means and a
// minimum over references, and per-writer EER curves over the pyramid
// index g.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoforge/descriptor.hpp"
#include "geoforge/metric.hpp"
#include "geoforge/rgmm.hpp"
#include "geoforge/synthgen.hpp"

namespace geoforge {

using Curve = std::array<double, kPyramidRegions>;

struct WriterSamples {
  std::string id;
  std::vector<PyramidDescriptors> genuine;
  std::vector<PyramidDescriptors> forgery;
};

struct Corpus {
  std::string name;
  bool synthetic = false;
  std::vector<WriterSamples> writers;
};

/// Reads `<root>/<writer>/genuine/*.pgm` and `<root>/<writer>/forgery/*.pgm`,
/// writers and files in lexicographic order. Images are converted with up to
/// `jobs` threads.
Corpus load_corpus(const std::filesystem::path& root, int jobs = 1);

/// Writers generated directly in SPD space. A planted mixture supplies
/// writer centers; each sample's fourteen regions are independent draws at
/// the writer's σ (genuine) or a_test·σ (forgery).
struct SyntheticSourceConfig {
  int dim = 10;
  int population_centers = 5;
  double population_spread = 1.0;  // tangent scale of planted centers around I
  double writer_spread = 0.5;      // σ of writer centers around their planted center
  double sigma_min = 0.1;          // writer σ drawn uniformly in [sigma_min, sigma_max]
  double sigma_max = 0.2;
  int writers = 20;
  int genuine = 24;
  int forgery = 24;
  double a_test = 1.5;
};

Corpus synthetic_corpus(const SyntheticSourceConfig& config, const std::string& name, Rng& rng,
                        const MhConfig& mh = {});

struct Fold {
  std::vector<int> dev;   // writer indices into the development corpus
  std::vector<int> test;  // writer indices into the testing corpus
  int repetition = 0;
  int role = 0;           // 0 or 1, which half develops
};

struct SplitPlan {
  std::string protocol;  // "intra" or "cross"
  std::vector<Fold> folds;
  int repetitions = 0;
};

/// Intra: per repetition the writers are shuffled, the first floor(n/2)
/// form one half, and both role orders are emitted. Cross: one fold, all of
/// A develops and all of B tests.
SplitPlan make_intra_splits(const Corpus& corpus, int repetitions, Rng& rng);
SplitPlan make_cross_splits(const Corpus& dev, const Corpus& test);

/// D whole-image (g = 1) genuine descriptors per writer, drawn without
/// replacement. Throws kInsufficientGenuine.
std::vector<SpdMatrix> build_dev_set(const Corpus& corpus, std::span<const int> writers, int D, Rng& rng);

/// Entry g-1 is delta_distance(model, R_g, Q_g).
Curve score_pair(const MetricModel& model, const PyramidDescriptors& r, const PyramidDescriptors& q);

/// Sorted ascending, then output(g) = mean of the g smallest entries.
std::vector<double> rearrange_scores(std::span<const double> delta);

/// Rearranged scores laid out questioned x reference x g.
struct ScoreTensor {
  int questioned = 0;
  int references = 0;
  int regions = kPyramidRegions;
  std::vector<double> values;
  std::vector<bool> genuine;  // label per questioned sample

  ScoreTensor(int q, int r, int g = kPyramidRegions);
  double& at(int q, int r, int g) { return values[(static_cast<std::size_t>(q) * references + r) * regions + g]; }
  double at(int q, int r, int g) const {
    return values[(static_cast<std::size_t>(q) * references + r) * regions + g];
  }
};

/// questioned x g matrix of minima over the reference slots.
Matrix aggregate_min_over_refs(const ScoreTensor& tensor);

/// Per-region generalized spectra between a writer's genuine samples and all
/// of its samples. Valid for any metric with W = I.
class SpectraCache {
 public:
  explicit SpectraCache(const Corpus& corpus);
  ~SpectraCache();
  SpectraCache(const SpectraCache&) = delete;
  SpectraCache& operator=(const SpectraCache&) = delete;

  const Corpus& corpus() const noexcept { return corpus_; }
  /// Spectra for (genuine i, sample j, region g), j indexing genuine then
  /// forgery. Built on first use; distinct writers may be requested
  /// concurrently.
  const Vector& spectrum(int writer, int i, int j, int g);

 private:
  struct WriterEntry;
  const Corpus& corpus_;
  std::vector<std::unique_ptr<WriterEntry>> entries_;
};

struct WriterCurve {
  std::string writer;
  std::vector<Curve> repetitions;
  Curve mean{};
};

struct TestStageConfig {
  int repetitions = 10;
  int references = 10;
  int jobs = 1;
};

/// For each repetition and writer: `references` genuine samples drawn
/// without replacement, the questioned set is the remaining genuine plus
/// every forgery, and the EER per g follows from the min-over-references
/// scores. Each writer draws from its own stream keyed by its corpus index.
/// Throws kInsufficientGenuine.
std::vector<WriterCurve> run_test_stage(const MetricModel& model, const Corpus& corpus,
                                        std::span<const int> writers, const TestStageConfig& config,
                                        Rng& rng, SpectraCache* cache = nullptr);

/// Plain mean over writers of their averaged curves.
Curve mean_curve(std::span<const WriterCurve> writers);

struct ExperimentConfig {
  std::string protocol = "intra";
  int D = 7;
  std::vector<int> K{3, 7, 11, 15};
  int L = 15;
  std::vector<double> a{kHardScale, kSoftScale};
  int split_repetitions = 5;
  TestStageConfig test{};
  PairSpec pairs{};
  TrainConfig train{};
  FitConfig fit{};
  MhConfig mh{};
  std::uint64_t seed = 1;
};

struct FoldResult {
  int id = 0;
  int repetition = 0;
  int role = 0;
  int K = 0;
  double a = 0.0;
  std::vector<std::string> dev_writers;
  std::vector<std::string> test_writers;
  RgmmModel model;
  int fit_iterations = 0;
  bool fit_converged = false;
  double fit_loglik = 0.0;
  TrainReport train;
  MetricModel metric;
  std::vector<WriterCurve> writers;
  Curve curve{};
};

struct ComboResult {
  int K = 0;
  double a = 0.0;
  std::vector<int> fold_ids;
  /// Mean over role orders within each split repetition.
  std::vector<Curve> repetition_curves;
  Curve averaged{};
};

struct ExperimentReport {
  std::string protocol;
  std::string dev_corpus;
  std::string test_corpus;
  bool synthetic = false;
  ExperimentConfig config;
  std::vector<FoldResult> folds;
  std::vector<ComboResult> combos;
};

using ProgressSink = std::function<void(const std::string&)>;

/// Per fold: development set, one mixture fit per K, and per a a synthetic
/// population, training pairs, metric and test stage. Intra runs on `dev`
/// alone; cross develops on `dev` and tests on `*test`.
ExperimentReport run_experiment(const ExperimentConfig& config, const Corpus& dev, const Corpus* test,
                                const ZetaTable& table, const ProgressSink& progress = {});

/// Stream derived from a master seed and a tag path, independent of any
/// other stream's consumption.
Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

}  // namespace geoforge
