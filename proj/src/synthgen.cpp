// src/synthgen.cpp

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

#include "geoforge/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

struct IndexPair {
  int first;
  int second;
};

std::vector<IndexPair> similar_indices(int L) {
  std::vector<IndexPair> out;
  for (int i = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j) out.push_back({i, j});
  return out;
}

std::vector<IndexPair> dissimilar_indices(int L) {
  std::vector<IndexPair> out;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) out.push_back({i, j});
  return out;
}

DistanceStats summarize(const std::vector<double>& values) {
  DistanceStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

nlohmann::json row_major(const SpdMatrix& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.dim(); ++i)
    for (Eigen::Index j = 0; j < m.dim(); ++j) a.push_back(m(i, j));
  return a;
}

}  // namespace

double parse_forgery_scale(std::string_view text) {
  if (text == "hard") return kHardScale;
  if (text == "soft") return kSoftScale;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(value > 1.0))
    throw Error(Errc::kConfig, "forgery scale must be 'hard', 'soft' or a number > 1, got '" +
                                   std::string(text) + "'");
  return value;
}

SynthPopulation generate_population(const RgmmModel& model, const SynthConfig& config, Rng& rng,
                                    const ZetaTable* table, const MhConfig& mh) {
  if (config.L < 1) throw Error(Errc::kInvalidArgument, "L must be at least 1");
  if (!(config.a > 1.0)) throw Error(Errc::kInvalidArgument, "forgery scale a must exceed 1");
  SynthPopulation pop;
  pop.dim = model.dim;
  for (int i = 0; i < model.K(); ++i) {
    const RgdParams& p = model.components[i].params;
    if (table) {
      for (const auto& [kind, sigma] : {std::pair{"genuine", p.sigma}, {"forgery", config.a * p.sigma}}) {
        if (!table->contains(sigma)) {
          std::ostringstream os;
          os << "center " << i << " " << kind << " sigma " << sigma << " outside ["
             << table->sigma_min() << ", " << table->sigma_max() << "]";
          throw Error(Errc::kSigmaOutOfTableRange, os.str());
        }
      }
    }
    Rng genuine_stream = split_stream(rng);
    Rng forgery_stream = split_stream(rng);
    CenterPopulation c;
    c.genuine = sample_rgd(p, config.L, genuine_stream, mh);
    c.forgery = sample_rgd(RgdParams(p.center, config.a * p.sigma), config.L, forgery_stream, mh);
    pop.centers.push_back(std::move(c));
  }
  return pop;
}

PairBatch build_pairs(const SynthPopulation& pop, const PairSpec& spec, Rng& rng) {
  if (pop.centers.empty()) throw Error(Errc::kInvalidArgument, "population has no centers");
  const int K = static_cast<int>(pop.centers.size());
  PairBatch batch;

  auto emit = [&](int center, const std::vector<IndexPair>& picks, bool similar) {
    const CenterPopulation& c = pop.centers[center];
    for (const IndexPair& ij : picks) {
      if (similar) batch.similar.push_back({c.genuine[ij.first], c.genuine[ij.second], center});
      else batch.dissimilar.push_back({c.genuine[ij.first], c.forgery[ij.second], center});
    }
  };

  if (spec.mode == PairSpec::Mode::kAll) {
    for (int i = 0; i < K; ++i) {
      const int L = static_cast<int>(pop.centers[i].genuine.size());
      emit(i, similar_indices(L), true);
      emit(i, dissimilar_indices(L), false);
    }
    if (batch.similar.empty())
      throw Error(Errc::kEmptySimilarClass, "no genuine-genuine pairs (L < 2)");
    return batch;
  }

  if (spec.n_per_class < 1) throw Error(Errc::kInvalidArgument, "n_per_class must be positive");
  for (bool similar : {true, false}) {
    // Center-balanced quota; the remainder goes to randomly chosen centers.
    std::vector<int> quota(K, spec.n_per_class / K);
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int r = 0; r < spec.n_per_class % K; ++r) ++quota[order[r]];
    for (int i = 0; i < K; ++i) {
      const int L = static_cast<int>(pop.centers[i].genuine.size());
      const std::vector<IndexPair> all = similar ? similar_indices(L) : dissimilar_indices(L);
      if (quota[i] > static_cast<int>(all.size())) {
        std::ostringstream os;
        os << "center " << i << " has " << all.size() << (similar ? " GG" : " GF")
           << " pairs, " << quota[i] << " requested";
        throw Error(Errc::kRequestedMoreThanAvailable, os.str());
      }
      std::vector<IndexPair> picks;
      std::sample(all.begin(), all.end(), std::back_inserter(picks), quota[i], rng);
      emit(i, picks, similar);
    }
  }
  return batch;
}

HardnessProfile hardness_profile(const SynthPopulation& pop) {
  if (pop.centers.empty()) throw Error(Errc::kInvalidArgument, "population has no centers");
  HardnessProfile out;
  std::vector<double> pooled_gg, pooled_gf;
  for (const CenterPopulation& c : pop.centers) {
    std::vector<double> gg, gf;
    for (std::size_t i = 0; i < c.genuine.size(); ++i) {
      const BasePoint base(c.genuine[i]);
      for (std::size_t j = i + 1; j < c.genuine.size(); ++j) gg.push_back(base.distance_sq(c.genuine[j]));
      for (const SpdMatrix& f : c.forgery) gf.push_back(base.distance_sq(f));
    }
    out.genuine_genuine.push_back(summarize(gg));
    out.genuine_forgery.push_back(summarize(gf));
    pooled_gg.insert(pooled_gg.end(), gg.begin(), gg.end());
    pooled_gf.insert(pooled_gf.end(), gf.begin(), gf.end());
  }
  out.pooled_genuine_genuine = summarize(pooled_gg);
  out.pooled_genuine_forgery = summarize(pooled_gf);
  return out;
}

void write_population_jsonl(const SynthPopulation& pop, std::ostream& out) {
  for (std::size_t i = 0; i < pop.centers.size(); ++i) {
    for (const auto& [kind, list] :
         {std::pair{"G", &pop.centers[i].genuine}, std::pair{"F", &pop.centers[i].forgery}}) {
      for (std::size_t k = 0; k < list->size(); ++k) {
        nlohmann::json rec{{"center", i}, {"kind", kind}, {"index", k}, {"matrix", row_major((*list)[k])}};
        out << rec.dump() << '\n';
      }
    }
  }
}

}  // namespace geoforge
