// include/geoforge/synthgen.hpp

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

// Quasi-synthetic populations: genuine and forgery SPD points drawn around
// every fitted mixture center, and the similar/dissimilar pair batches that
// metric training consumes.

#include <iosfwd>
#include <string_view>
#include <vector>

#include "geoforge/rgmm.hpp"

namespace geoforge {

inline constexpr double kHardScale = 1.1;
inline constexpr double kSoftScale = 2.0;

/// "hard" -> 1.1, "soft" -> 2, otherwise a decimal number > 1.
double parse_forgery_scale(std::string_view text);

struct SynthConfig {
  int L = 15;        // samples per kind per center
  double a = kHardScale;  // forgery dispersion scale, σ_F = a·σ_i
};

struct CenterPopulation {
  std::vector<SpdMatrix> genuine;
  std::vector<SpdMatrix> forgery;
};

struct SynthPopulation {
  int dim = 0;
  std::vector<CenterPopulation> centers;
};

/// For every center i: L draws from G(M_i, σ_i) and L from G(M_i, a·σ_i).
/// When a table is given, both dispersions must lie in its range
/// (kSigmaOutOfTableRange names the offending center and kind).
SynthPopulation generate_population(const RgmmModel& model, const SynthConfig& config, Rng& rng,
                                    const ZetaTable* table = nullptr, const MhConfig& mh = {});

enum class PairLabel { kSimilar, kDissimilar };

struct SpdPair {
  SpdMatrix first;
  SpdMatrix second;
  int center;
};

/// Training pairs. Only this type reaches metric training, so the seed data
/// the mixture was fitted on never does.
struct PairBatch {
  std::vector<SpdPair> similar;     // ω⁺: genuine-genuine within a center
  std::vector<SpdPair> dissimilar;  // ω⁻: genuine-forgery within a center
};

struct PairSpec {
  enum class Mode { kAll, kSampled };
  Mode mode = Mode::kAll;
  int n_per_class = 0;  // kSampled only
};

/// kAll enumerates the C(L,2) GG and L² GF pairs of every center. kSampled
/// draws n_per_class of each without replacement, spread over the centers
/// with per-center counts differing by at most one.
PairBatch build_pairs(const SynthPopulation& pop, const PairSpec& spec, Rng& rng);

struct DistanceStats {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Squared Rao distances of all within-center GG and GF pairs.
struct HardnessProfile {
  std::vector<DistanceStats> genuine_genuine;  // per center
  std::vector<DistanceStats> genuine_forgery;  // per center
  DistanceStats pooled_genuine_genuine;
  DistanceStats pooled_genuine_forgery;
};

HardnessProfile hardness_profile(const SynthPopulation& pop);

/// JSON lines: {"center", "kind": "G"|"F", "index", "matrix": row-major}.
void write_population_jsonl(const SynthPopulation& pop, std::ostream& out);

}  // namespace geoforge
