// src/metric.cpp

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

#include "geoforge/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "geoforge/error.hpp"
#include "geoforge/roc.hpp"

namespace geoforge {
namespace {

void require_alpha_beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    std::ostringstream os;
    os << "alpha and beta must be positive, got (" << alpha << ", " << beta << ")";
    throw Error(Errc::kNonPositiveAlphaBeta, os.str());
  }
}

// log((α e^{βℓ} + β e^{-αℓ}) / (α+β)), with ℓ = log λ
double ab_term(double log_lambda, double alpha, double beta) {
  const double x1 = beta * log_lambda, x2 = -alpha * log_lambda;
  if (std::max(std::abs(x1), std::abs(x2)) < 0.5)
    return std::log1p((alpha * std::expm1(x1) + beta * std::expm1(x2)) / (alpha + beta));
  const double top = std::max(x1, x2);
  return top + std::log(alpha * std::exp(x1 - top) + beta * std::exp(x2 - top)) -
         std::log(alpha + beta);
}

struct SplitScores {
  std::vector<Vector> similar;     // generalized spectra
  std::vector<Vector> dissimilar;
};

void score_all(const std::vector<Vector>& spectra, AlphaBeta ab, std::vector<double>& out) {
  out.resize(spectra.size());
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    const double v = ab_divergence_from_spectrum(spectra[k], ab.alpha, ab.beta);
    out[k] = v * v;
  }
}

}  // namespace

MetricModel MetricModel::single_block(int d, AlphaBeta ab) {
  MetricModel model;
  model.d = d;
  model.m = 1;
  model.q = d;
  model.W = {Matrix::Identity(d, d)};
  model.A = {ab};
  model.sigma = Matrix::Identity(1, 1);
  return model;
}

void check_metric_model(const MetricModel& model) {
  if (model.m < 1 || model.q < 1 || model.d != model.m * model.q)
    throw Error(Errc::kInvalidArgument, "metric model needs d = m * q with m, q >= 1");
  if (static_cast<int>(model.W.size()) != model.m || static_cast<int>(model.A.size()) != model.m)
    throw Error(Errc::kInvalidArgument, "metric model needs one W and one (alpha, beta) per block");
  for (const Matrix& w : model.W) {
    if (w.rows() != model.d || w.cols() != model.q)
      throw Error(Errc::kDimensionMismatch, "projection block has the wrong shape");
    const double residual =
        (w.transpose() * w - Matrix::Identity(model.q, model.q)).cwiseAbs().maxCoeff();
    if (residual > kSymmetryTol) throw Error(Errc::kNotOrthonormal, "projection block is not orthonormal");
  }
  for (const AlphaBeta& ab : model.A) {
    require_alpha_beta(ab.alpha, ab.beta);
    if (ab.alpha > kAlphaBetaMax || ab.beta > kAlphaBetaMax)
      throw Error(Errc::kInvalidArgument, "alpha/beta above the allowed maximum");
  }
  if (model.sigma.rows() != model.m || model.sigma.cols() != model.m)
    throw Error(Errc::kDimensionMismatch, "mixing matrix must be m x m");
  validate_spd(model.sigma);
}

double ab_divergence_from_spectrum(const Vector& lambda, double alpha, double beta) {
  require_alpha_beta(alpha, beta);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) sum += ab_term(std::log(lambda(i)), alpha, beta);
  return std::max(0.0, sum / (alpha * beta));
}

double ab_divergence(const SpdMatrix& p, const SpdMatrix& q, double alpha, double beta) {
  require_alpha_beta(alpha, beta);
  if (p.dim() != q.dim()) throw Error(Errc::kDimensionMismatch, "ab_divergence: dimensions differ");
  if (p == q) return 0.0;
  return ab_divergence_from_spectrum(generalized_eigvals(p, q), alpha, beta);
}

std::vector<SpdMatrix> project_blocks(const MetricModel& model, const SpdMatrix& y) {
  if (y.dim() != model.d) throw Error(Errc::kDimensionMismatch, "input dimension differs from model d");
  std::vector<SpdMatrix> out;
  out.reserve(model.W.size());
  for (const Matrix& w : model.W) out.push_back(congruence(w, y));
  return out;
}

std::vector<Vector> pair_spectra(const MetricModel& model, const SpdMatrix& p, const SpdMatrix& q) {
  if (p.dim() != model.d || q.dim() != model.d)
    throw Error(Errc::kDimensionMismatch, "pair dimension differs from model d");
  std::vector<Vector> out;
  out.reserve(model.W.size());
  if (p == q) {
    out.assign(model.W.size(), Vector::Ones(model.q));
    return out;
  }
  const std::vector<SpdMatrix> bp = project_blocks(model, p), bq = project_blocks(model, q);
  for (std::size_t c = 0; c < bp.size(); ++c) out.push_back(generalized_eigvals(bp[c], bq[c]));
  return out;
}

double delta_from_spectra(const MetricModel& model, std::span<const Vector> spectra) {
  if (static_cast<int>(spectra.size()) != model.m)
    throw Error(Errc::kDimensionMismatch, "expected one spectrum per block");
  Vector v(model.m);
  for (int c = 0; c < model.m; ++c)
    v(c) = ab_divergence_from_spectrum(spectra[c], model.A[c].alpha, model.A[c].beta);
  return v.dot(model.sigma * v);
}

double delta_distance(const MetricModel& model, const SpdMatrix& p, const SpdMatrix& q) {
  return delta_from_spectra(model, pair_spectra(model, p, q));
}

std::vector<double> alpha_beta_grid(const TrainConfig& config) {
  if (!(config.grid_min > 0.0) || config.grid_max > kAlphaBetaMax ||
      !(config.grid_max >= config.grid_min) || !(config.grid_step > 0.0))
    throw Error(Errc::kConfig, "alpha-beta grid must satisfy 0 < min <= max <= 4 and step > 0");
  std::vector<double> grid;
  const int n = static_cast<int>(std::floor((config.grid_max - config.grid_min) / config.grid_step + 1e-9));
  for (int k = 0; k <= n; ++k) grid.push_back(config.grid_min + k * config.grid_step);
  return grid;
}

std::pair<MetricModel, TrainReport> train_metric(const PairBatch& pairs, int d,
                                                 const TrainConfig& config, Rng& rng) {
  if (pairs.similar.empty() || pairs.dissimilar.empty())
    throw Error(Errc::kEmptyClass, "training needs both similar and dissimilar pairs");
  if (!(config.validation_fraction > 0.0) || config.validation_fraction > 0.5)
    throw Error(Errc::kConfig, "validation fraction must lie in (0, 0.5]");
  const std::vector<double> grid = alpha_beta_grid(config);

  // W = I throughout, so a pair's generalized spectrum is fixed across the grid.
  MetricModel model = MetricModel::single_block(d, {grid.front(), grid.front()});
  SplitScores train, validation;
  auto split = [&](const std::vector<SpdPair>& list, std::vector<Vector>& tr, std::vector<Vector>& va) {
    std::vector<std::size_t> order(list.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(config.validation_fraction * list.size())));
    for (std::size_t k = 0; k < order.size(); ++k) {
      const SpdPair& pr = list[order[k]];
      if (pr.first.dim() != d || pr.second.dim() != d)
        throw Error(Errc::kDimensionMismatch, "pair dimension differs from d");
      (k < n_val ? va : tr).push_back(pair_spectra(model, pr.first, pr.second).front());
    }
  };
  split(pairs.similar, train.similar, validation.similar);
  split(pairs.dissimilar, train.dissimilar, validation.dissimilar);
  // A class too small to split still needs train data; reuse validation then.
  if (train.similar.empty()) train.similar = validation.similar;
  if (train.dissimilar.empty()) train.dissimilar = validation.dissimilar;

  const bool use_auc = config.objective == TrainConfig::Objective::kAuc;
  auto objective = [&](const std::vector<double>& s, const std::vector<double>& f) {
    return use_auc ? auc(s, f) : -eer(s, f).eer_percent;
  };

  TrainReport report;
  report.grid_points = grid.size() * grid.size();
  bool have = false;
  std::vector<double> s, f;
  for (double alpha : grid) {
    for (double beta : grid) {
      score_all(train.similar, {alpha, beta}, s);
      score_all(train.dissimilar, {alpha, beta}, f);
      const double value = objective(s, f);
      if (!have || value > report.train_objective) {
        have = true;
        report.train_objective = value;
        report.best = {alpha, beta};
      }
    }
  }
  if (!use_auc) report.train_objective = -report.train_objective;

  score_all(validation.similar, report.best, s);
  score_all(validation.dissimilar, report.best, f);
  const auto [lo_s, hi_s] = std::minmax_element(s.begin(), s.end());
  const auto [lo_f, hi_f] = std::minmax_element(f.begin(), f.end());
  if (*lo_s == *hi_s && *lo_f == *hi_f && *lo_s == *lo_f)
    throw Error(Errc::kDegenerateScores, "all validation scores are identical");
  const EerResult val_eer = eer(s, f);
  report.validation_auc = auc(s, f);
  report.validation_eer = val_eer.eer_percent;
  report.threshold = val_eer.threshold;
  report.train_similar = train.similar.size();
  report.train_dissimilar = train.dissimilar.size();
  report.validation_similar = validation.similar.size();
  report.validation_dissimilar = validation.dissimilar.size();

  model.A = {report.best};
  model.threshold = report.threshold;
  return {std::move(model), report};
}

PairScores score_pairs(const MetricModel& model, const PairBatch& pairs) {
  PairScores out;
  out.similar.reserve(pairs.similar.size());
  out.dissimilar.reserve(pairs.dissimilar.size());
  for (const SpdPair& p : pairs.similar) out.similar.push_back(delta_distance(model, p.first, p.second));
  for (const SpdPair& p : pairs.dissimilar)
    out.dissimilar.push_back(delta_distance(model, p.first, p.second));
  return out;
}

}  // namespace geoforge
