// src/rgmm.cpp

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

#include "geoforge/rgmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

void require_points(std::span<const SpdMatrix> x, int K) {
  if (K < 1) throw Error(Errc::kInvalidArgument, "mixture needs K >= 1");
  if (static_cast<int>(x.size()) < K) {
    std::ostringstream os;
    os << "need at least K=" << K << " points, got " << x.size();
    throw Error(Errc::kTooFewPoints, os.str());
  }
  for (const SpdMatrix& p : x)
    if (p.dim() != x.front().dim())
      throw Error(Errc::kDimensionMismatch, "mixture data have mixed dimensions");
}

double log_sum_exp(const Eigen::RowVectorXd& row) {
  const double top = row.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((row.array() - top).exp().sum());
}

// log ω_i + rgd_logpdf for every (n, i)
Matrix log_joint(const Matrix& dist_sq, const RgmmModel& model, const ZetaTable& table) {
  Matrix out(dist_sq.rows(), dist_sq.cols());
  for (int i = 0; i < model.K(); ++i) {
    const MixtureComponent& c = model.components[i];
    const double offset = std::log(c.weight) - table.log_zeta(c.params.sigma);
    const double scale = -1.0 / (2.0 * c.params.sigma * c.params.sigma);
    out.col(i) = (dist_sq.col(i) * scale).array() + offset;
  }
  return out;
}

Matrix responsibilities_from(const Matrix& joint) {
  Matrix out(joint.rows(), joint.cols());
  for (Eigen::Index n = 0; n < joint.rows(); ++n) {
    const double norm = log_sum_exp(joint.row(n));
    out.row(n) = (joint.row(n).array() - norm).exp();
  }
  return out;
}

double loglik_from(const Matrix& joint) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < joint.rows(); ++n) total += log_sum_exp(joint.row(n));
  return total;
}

// Maximizer of Σ N_i log ω_i over {ω_i >= floor, Σ ω_i = 1}.
std::vector<double> floored_weights(const std::vector<double>& mass) {
  const std::size_t K = mass.size();
  std::vector<bool> floored(K, false);
  std::vector<double> w(K);
  for (;;) {
    double free_mass = 0.0;
    std::size_t n_floored = 0;
    for (std::size_t i = 0; i < K; ++i) {
      if (floored[i]) ++n_floored;
      else free_mass += mass[i];
    }
    const double budget = 1.0 - kWeightFloor * static_cast<double>(n_floored);
    bool changed = false;
    for (std::size_t i = 0; i < K; ++i) {
      if (floored[i]) {
        w[i] = kWeightFloor;
        continue;
      }
      w[i] = free_mass > 0.0 ? budget * mass[i] / free_mass : budget / (K - n_floored);
      if (w[i] < kWeightFloor) {
        floored[i] = true;
        changed = true;
      }
    }
    if (!changed) return w;
  }
}

struct MStepResult {
  RgmmModel model;
  Matrix dist_sq;
};

class EmptyComponentError : public Error {
 public:
  EmptyComponentError(int component, double mass)
      : Error(Errc::kEmptyComponent, message(component, mass)), component_(component) {}
  int component() const noexcept { return component_; }

 private:
  static std::string message(int component, double mass) {
    std::ostringstream os;
    os << "component " << component << " has total responsibility " << mass;
    return os.str();
  }
  int component_;
};

MStepResult m_step_impl(std::span<const SpdMatrix> x, const Matrix& resp, const ZetaTable& table,
                        const KarcherOptions& karcher, const RgmmModel* warm) {
  const Eigen::Index N = resp.rows(), K = resp.cols();
  if (static_cast<std::size_t>(N) != x.size())
    throw Error(Errc::kDimensionMismatch, "responsibilities and data differ in length");
  std::vector<double> mass(K);
  for (Eigen::Index i = 0; i < K; ++i) {
    mass[i] = resp.col(i).sum();
    if (mass[i] < 10.0 * kWeightFloor) throw EmptyComponentError(static_cast<int>(i), mass[i]);
  }
  const std::vector<double> weights = floored_weights(mass);

  MStepResult out;
  out.model.dim = static_cast<int>(x.front().dim());
  out.dist_sq.resize(N, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    std::vector<double> gamma(resp.col(i).data(), resp.col(i).data() + N);
    std::optional<SpdMatrix> init;
    if (warm) init = warm->components[i].params.center;
    SpdMatrix center = karcher_mean(x, gamma, karcher, init);
    const BasePoint base(center);
    double spread = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      out.dist_sq(n, i) = base.distance_sq(x[n]);
      spread += gamma[n] * out.dist_sq(n, i);
    }
    const double sigma = mle_sigma_clamped(spread / mass[i], table);
    out.model.components.push_back({weights[i], RgdParams(std::move(center), sigma)});
  }
  return out;
}

}  // namespace

void check_model(const RgmmModel& model, const ZetaTable& table) {
  if (model.K() < 1) throw Error(Errc::kInvalidArgument, "mixture has no components");
  double total = 0.0;
  for (const MixtureComponent& c : model.components) {
    if (c.params.center.dim() != model.dim)
      throw Error(Errc::kDimensionMismatch, "component center dimension differs from model");
    if (!(c.weight >= kWeightFloor * (1.0 - 1e-12)))
      throw Error(Errc::kInvalidArgument, "component weight below floor");
    if (!table.contains(c.params.sigma))
      throw Error(Errc::kSigmaOutOfTableRange, "component sigma outside zeta table");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw Error(Errc::kInvalidArgument, "component weights do not sum to one");
  if (table.dim() != model.dim)
    throw Error(Errc::kDimensionMismatch, "zeta table dimension differs from model");
}

Matrix distance_sq_matrix(std::span<const SpdMatrix> x, const RgmmModel& model) {
  Matrix out(static_cast<Eigen::Index>(x.size()), model.K());
  for (int i = 0; i < model.K(); ++i) {
    const BasePoint base(model.components[i].params.center);
    for (std::size_t n = 0; n < x.size(); ++n) out(static_cast<Eigen::Index>(n), i) = base.distance_sq(x[n]);
  }
  return out;
}

RgmmModel init_model(std::span<const SpdMatrix> x, int K, Rng& rng, const ZetaTable& table) {
  require_points(x, K);
  const std::size_t N = x.size();
  std::vector<std::size_t> seeds;
  std::vector<double> nearest(N, std::numeric_limits<double>::infinity());
  std::vector<int> owner(N, 0);
  std::vector<bool> chosen(N, false);

  auto add_seed = [&](std::size_t s) {
    seeds.push_back(s);
    chosen[s] = true;
    const BasePoint base(x[s]);
    for (std::size_t n = 0; n < N; ++n) {
      const double d2 = n == s ? 0.0 : base.distance_sq(x[n]);
      if (d2 < nearest[n]) {
        nearest[n] = d2;
        owner[n] = static_cast<int>(seeds.size() - 1);
      }
    }
  };

  add_seed(std::uniform_int_distribution<std::size_t>(0, N - 1)(rng));
  while (static_cast<int>(seeds.size()) < K) {
    std::vector<double> mass(N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
      if (!chosen[n]) mass[n] = nearest[n];
    if (std::accumulate(mass.begin(), mass.end(), 0.0) <= 0.0)
      for (std::size_t n = 0; n < N; ++n) mass[n] = chosen[n] ? 0.0 : 1.0;
    add_seed(std::discrete_distribution<std::size_t>(mass.begin(), mass.end())(rng));
  }

  std::vector<double> spread(K, 0.0);
  std::vector<int> count(K, 0);
  double global = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    spread[owner[n]] += nearest[n];
    ++count[owner[n]];
    global += nearest[n];
  }
  global /= static_cast<double>(N);

  RgmmModel model;
  model.dim = static_cast<int>(x.front().dim());
  for (int i = 0; i < K; ++i) {
    double mean_sq = spread[i] / count[i];
    if (mean_sq <= 0.0) mean_sq = global;
    model.components.push_back(
        {1.0 / K, RgdParams(x[seeds[i]], mle_sigma_clamped(mean_sq, table))});
  }
  return model;
}

Matrix e_step(std::span<const SpdMatrix> x, const RgmmModel& model, const ZetaTable& table) {
  return responsibilities_from(log_joint(distance_sq_matrix(x, model), model, table));
}

RgmmModel m_step(std::span<const SpdMatrix> x, const Matrix& responsibilities,
                 const ZetaTable& table, const KarcherOptions& karcher) {
  return m_step_impl(x, responsibilities, table, karcher, nullptr).model;
}

double loglik(std::span<const SpdMatrix> x, const RgmmModel& model, const ZetaTable& table) {
  return loglik_from(log_joint(distance_sq_matrix(x, model), model, table));
}

std::pair<RgmmModel, FitReport> fit(std::span<const SpdMatrix> x, int K, const FitConfig& config,
                                    Rng& rng, const ZetaTable& table) {
  require_points(x, K);
  if (config.restarts < 1 || config.max_iter < 1)
    throw Error(Errc::kInvalidArgument, "fit needs restarts >= 1 and max_iter >= 1");
  if (x.front().dim() != table.dim())
    throw Error(Errc::kDimensionMismatch, "zeta table dimension differs from data");

  // Global dispersion, used when an emptied component is reseeded.
  const SpdMatrix global_mean = karcher_mean(x, config.karcher);
  double global_spread = 0.0;
  {
    const BasePoint base(global_mean);
    for (const SpdMatrix& p : x) global_spread += base.distance_sq(p);
  }
  const double global_sigma =
      mle_sigma_clamped(global_spread / static_cast<double>(x.size()), table);

  std::optional<std::pair<RgmmModel, FitReport>> best;
  FitReport summary;
  for (int restart = 0; restart < config.restarts; ++restart) {
    Rng stream = split_stream(rng);
    RgmmModel model = init_model(x, K, stream, table);
    Matrix dist_sq = distance_sq_matrix(x, model);
    Matrix joint = log_joint(dist_sq, model, table);
    FitReport report;
    report.loglik_trace.push_back(loglik_from(joint));
    Matrix resp = responsibilities_from(joint);

    for (int iter = 1; iter <= config.max_iter; ++iter) {
      MStepResult next;
      try {
        next = m_step_impl(x, resp, table, config.karcher, &model);
      } catch (const EmptyComponentError& empty) {
        // Reseed at the datum the current mixture explains worst.
        Eigen::Index worst = 0;
        Eigen::VectorXd density(joint.rows());
        for (Eigen::Index n = 0; n < joint.rows(); ++n) density(n) = log_sum_exp(joint.row(n));
        density.minCoeff(&worst);
        MixtureComponent& c = model.components[empty.component()];
        c.params = RgdParams(x[worst], global_sigma);
        c.weight = 1.0 / K;
        double total = 0.0;
        for (const MixtureComponent& m : model.components) total += m.weight;
        std::vector<double> mass;
        for (const MixtureComponent& m : model.components) mass.push_back(m.weight / total);
        const std::vector<double> w = floored_weights(mass);
        for (int i = 0; i < K; ++i) model.components[i].weight = w[i];
        dist_sq = distance_sq_matrix(x, model);
        joint = log_joint(dist_sq, model, table);
        resp = responsibilities_from(joint);
        report.rescue_iterations.push_back(iter);
        report.loglik_trace.push_back(loglik_from(joint));
        report.iterations = iter;
        continue;
      }
      model = std::move(next.model);
      dist_sq = std::move(next.dist_sq);
      joint = log_joint(dist_sq, model, table);
      resp = responsibilities_from(joint);
      const double ll = loglik_from(joint);
      const double gain = ll - report.loglik_trace.back();
      report.loglik_trace.push_back(ll);
      report.iterations = iter;
      if (config.progress) config.progress(restart, iter, ll);
      if (gain < config.tol) {
        report.converged = true;
        break;
      }
    }
    report.responsibilities = resp;
    summary.restart_logliks.push_back(report.loglik_trace.back());
    if (!best || report.loglik_trace.back() > best->second.loglik_trace.back()) {
      report.best_restart = restart;
      best.emplace(std::move(model), std::move(report));
    }
  }
  best->second.restart_logliks = std::move(summary.restart_logliks);
  return std::move(*best);
}

}  // namespace geoforge
