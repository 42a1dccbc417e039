// include/geoforge/metric.hpp

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

// Similarity model Δ = {{W_c}, A, Σ}: each SPD input is projected onto m
// blocks of size q by orthonormal congruences, compared block-wise with an
// alpha-beta log-det divergence, and the divergence vector v is mapped to
// Δ = vᵀ Σ v.

#include <span>
#include <utility>
#include <vector>

#include "geoforge/spd.hpp"
#include "geoforge/synthgen.hpp"

namespace geoforge {

inline constexpr double kAlphaBetaMax = 4.0;

struct AlphaBeta {
  double alpha;
  double beta;
};

struct MetricModel {
  int d = 0;
  int m = 0;
  int q = 0;
  std::vector<Matrix> W;       // m matrices d x q, orthonormal columns
  std::vector<AlphaBeta> A;    // one row per block
  Matrix sigma;                // m x m SPD
  double threshold = 0.0;      // validation equal-error operating point

  /// m = 1, q = d, W = I, Σ = 1.
  static MetricModel single_block(int d, AlphaBeta ab);
};

/// Throws unless d = m·q, every W_c is d x q with orthonormal columns,
/// α_c, β_c ∈ (0, kAlphaBetaMax] and Σ is SPD.
void check_metric_model(const MetricModel& model);

/// (1/(αβ)) Σ_i log((α λ_i^β + β λ_i^{-α}) / (α+β)) over the generalized
/// eigenvalues λ_i of (P, Q). Zero exactly when P == Q.
double ab_divergence(const SpdMatrix& p, const SpdMatrix& q, double alpha, double beta);
/// Same, from the generalized spectrum directly.
double ab_divergence_from_spectrum(const Vector& lambda, double alpha, double beta);

std::vector<SpdMatrix> project_blocks(const MetricModel& model, const SpdMatrix& y);

/// Per-block generalized spectra of a pair; these do not depend on A or Σ,
/// so callers cache them while sweeping divergence parameters.
std::vector<Vector> pair_spectra(const MetricModel& model, const SpdMatrix& p, const SpdMatrix& q);
double delta_from_spectra(const MetricModel& model, std::span<const Vector> spectra);

double delta_distance(const MetricModel& model, const SpdMatrix& p, const SpdMatrix& q);

struct TrainConfig {
  double grid_min = 0.1;
  double grid_max = 2.0;
  double grid_step = 0.1;
  enum class Objective { kAuc, kEer };
  Objective objective = Objective::kEer;
  double validation_fraction = 0.3;
};

struct TrainReport {
  AlphaBeta best{0.0, 0.0};
  std::size_t train_similar = 0, train_dissimilar = 0;
  std::size_t validation_similar = 0, validation_dissimilar = 0;
  std::size_t grid_points = 0;
  double train_objective = 0.0;
  double validation_auc = 0.0;
  double validation_eer = 0.0;  // percent
  double threshold = 0.0;
};

std::vector<double> alpha_beta_grid(const TrainConfig& config);

/// Fixes m = 1, q = d, W = I, Σ = 1 and picks (α, β) on the grid. Pairs are
/// split per class into train and validation parts; the grid point with the
/// best train objective wins (ties: smallest α, then smallest β) and the
/// validation part yields the reported AUC, EER and threshold.
std::pair<MetricModel, TrainReport> train_metric(const PairBatch& pairs, int d,
                                                 const TrainConfig& config, Rng& rng);

struct PairScores {
  std::vector<double> similar;
  std::vector<double> dissimilar;
};

PairScores score_pairs(const MetricModel& model, const PairBatch& pairs);

}  // namespace geoforge
