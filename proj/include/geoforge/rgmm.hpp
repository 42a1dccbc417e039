// include/geoforge/rgmm.hpp

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

// Mixtures of Riemannian Gaussians fitted by expectation-maximization. The
// fitted centers play the role of synthetic writers.

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "geoforge/rgd.hpp"
#include "geoforge/spd.hpp"

namespace geoforge {

inline constexpr double kWeightFloor = 1e-4;

struct MixtureComponent {
  double weight;
  RgdParams params;
};

struct RgmmModel {
  int dim = 0;
  std::vector<MixtureComponent> components;

  int K() const noexcept { return static_cast<int>(components.size()); }
};

/// Throws kInvalidArgument unless weights sit on the floored simplex, all
/// centers share `dim`, and every σ lies inside the table range.
void check_model(const RgmmModel& model, const ZetaTable& table);

struct FitConfig {
  double tol = 1e-5;
  int max_iter = 100;
  int restarts = 5;
  KarcherOptions karcher{};
  /// Called after every EM iteration with (restart, iteration, log-likelihood).
  std::function<void(int, int, double)> progress;
};

struct FitReport {
  std::vector<double> loglik_trace;  // best restart, one entry per iteration plus the initial one
  int iterations = 0;
  bool converged = false;
  Matrix responsibilities;           // N x K at exit
  int best_restart = 0;
  std::vector<double> restart_logliks;
  std::vector<int> rescue_iterations;  // iterations where an empty component was reseeded
};

/// k-means++ seeding under the Rao distance. σ_i comes from the mean squared
/// distance of the points nearest to seed i, mapped through mle_sigma.
RgmmModel init_model(std::span<const SpdMatrix> x, int K, Rng& rng, const ZetaTable& table);

/// N x K responsibilities, rows summing to one.
Matrix e_step(std::span<const SpdMatrix> x, const RgmmModel& model, const ZetaTable& table);

/// Weighted Karcher means, weights on the floored simplex, σ by mle_sigma.
/// A component whose total responsibility falls below 10·kWeightFloor raises
/// kEmptyComponent; fit() handles that case by reseeding.
RgmmModel m_step(std::span<const SpdMatrix> x, const Matrix& responsibilities,
                 const ZetaTable& table, const KarcherOptions& karcher = {});

/// Σ_n log Σ_i ω_i exp(rgd_logpdf(X_n; M_i, σ_i)), via log-sum-exp.
double loglik(std::span<const SpdMatrix> x, const RgmmModel& model, const ZetaTable& table);

std::pair<RgmmModel, FitReport> fit(std::span<const SpdMatrix> x, int K, const FitConfig& config,
                                    Rng& rng, const ZetaTable& table);

/// N x K squared Rao distances from every point to every center.
Matrix distance_sq_matrix(std::span<const SpdMatrix> x, const RgmmModel& model);

}  // namespace geoforge
