// src/rgd.cpp

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

#include "geoforge/rgd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log density and the virial Σ_{i<j} (x/2)·coth(x/2), x = |r_i - r_j|, in one
// pass. The virial gives the mean squared radius through the identity
// E‖r‖² = σ²·(d + E[r·∇S]) where S is the sinh part of the log density.
struct RadialEval {
  double log_density;
  double virial;
};

RadialEval eval_radial(const Vector& r, double sigma) {
  const Eigen::Index d = r.size();
  double sinh_part = 0.0;
  double virial = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double x = std::abs(r(i) - r(j));
      if (x == 0.0) return {kNegInf, 0.0};
      const double em = std::expm1(-x);  // e^{-x} - 1, in (-1, 0)
      sinh_part += 0.5 * x - std::numbers::ln2 + std::log(-em);
      virial += 0.5 * x * (2.0 + em) / (-em);
    }
  }
  return {-r.squaredNorm() / (2.0 * sigma * sigma) + sinh_part, virial};
}

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream os;
    os << "sigma must be positive and finite, got " << sigma;
    throw Error(Errc::kInvalidArgument, os.str());
  }
}

// Random-walk Metropolis chain on the radial coordinates.
class RadialChain {
 public:
  RadialChain(int dim, double sigma, const MhConfig& config)
      : sigma_(sigma), step_(config.step_scale * sigma / std::sqrt(static_cast<double>(dim))),
        state_(dim), proposal_(dim) {
    // Spread start near the mode of one Weyl chamber keeps every pair apart.
    for (int i = 0; i < dim; ++i)
      state_(i) = (sigma * sigma + sigma) * (i - 0.5 * (dim - 1));
    current_ = eval_radial(state_, sigma_);
  }

  bool step(Rng& rng) {
    for (Eigen::Index i = 0; i < state_.size(); ++i) proposal_(i) = state_(i) + step_ * normal_(rng);
    const RadialEval next = eval_radial(proposal_, sigma_);
    const double log_ratio = next.log_density - current_.log_density;
    if (log_ratio >= 0.0 || std::log(uniform_(rng)) < log_ratio) {
      state_.swap(proposal_);
      current_ = next;
      return true;
    }
    return false;
  }

  const Vector& state() const noexcept { return state_; }
  double virial() const noexcept { return current_.virial; }

 private:
  double sigma_;
  double step_;
  Vector state_;
  Vector proposal_;
  RadialEval current_{};
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

double estimate_phi(int dim, double sigma, std::int64_t samples, Rng& rng, const MhConfig& mh) {
  RadialChain chain(dim, sigma, mh);
  for (int i = 0; i < mh.burn_in; ++i) chain.step(rng);
  double sum = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    chain.step(rng);
    sum += chain.virial();
  }
  return sigma * sigma * (dim + sum / static_cast<double>(samples));
}

// Pool-adjacent-violators projection onto non-decreasing sequences.
std::vector<double> isotonic(const std::vector<double>& values) {
  std::vector<double> level;
  std::vector<std::size_t> width;
  for (double v : values) {
    level.push_back(v);
    width.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const std::size_t w = width.back() + width[width.size() - 2];
      const double merged =
          (level.back() * width.back() + level[level.size() - 2] * width[width.size() - 2]) / w;
      level.pop_back();
      width.pop_back();
      level.back() = merged;
      width.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t b = 0; b < level.size(); ++b) out.insert(out.end(), width[b], level[b]);
  return out;
}

// expm1(x)/x, continuous at 0
double expm1_ratio(double x) { return std::abs(x) < 1e-12 ? 1.0 + 0.5 * x : std::expm1(x) / x; }

std::string sigma_range_message(double sigma, double lo, double hi) {
  std::ostringstream os;
  os << "sigma " << sigma << " outside table range [" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

RgdParams::RgdParams(SpdMatrix c, double s) : center(std::move(c)), sigma(s) { require_sigma(s); }

double radial_log_density(const Vector& r, double sigma) {
  require_sigma(sigma);
  return eval_radial(r, sigma).log_density;
}

RadialSamples sample_radial(int dim, double sigma, int n, Rng& rng, const MhConfig& config) {
  require_sigma(sigma);
  if (dim < 1 || n < 0 || config.thin < 1 || config.burn_in < 0)
    throw Error(Errc::kInvalidArgument, "sample_radial: bad dimension, count or chain settings");
  RadialChain chain(dim, sigma, config);
  for (int i = 0; i < config.burn_in; ++i) chain.step(rng);
  RadialSamples out;
  out.draws.reserve(n);
  std::int64_t accepted = 0;
  for (int k = 0; k < n; ++k) {
    for (int t = 0; t < config.thin; ++t) accepted += chain.step(rng) ? 1 : 0;
    out.draws.push_back(chain.state());
  }
  const std::int64_t steps = static_cast<std::int64_t>(n) * config.thin;
  out.acceptance_rate = steps > 0 ? static_cast<double>(accepted) / steps : 0.0;
  return out;
}

ZetaTable::ZetaTable(int dim, std::vector<double> sigma, std::vector<double> log_zeta,
                     std::vector<double> phi, std::int64_t mc_samples, std::uint64_t seed)
    : dim_(dim),
      sigma_(std::move(sigma)),
      log_zeta_(std::move(log_zeta)),
      phi_(std::move(phi)),
      mc_samples_(mc_samples),
      seed_(seed) {
  if (dim_ < 1) throw Error(Errc::kInvalidArgument, "zeta table dimension must be positive");
  if (sigma_.size() < 32 || log_zeta_.size() != sigma_.size() || phi_.size() != sigma_.size())
    throw Error(Errc::kInvalidArgument, "zeta table needs at least 32 aligned nodes");
  for (std::size_t k = 0; k < sigma_.size(); ++k) {
    if (!(sigma_[k] > 0.0) || !std::isfinite(log_zeta_[k]) || !(phi_[k] > 0.0))
      throw Error(Errc::kInvalidArgument, "zeta table has a non-finite or non-positive node");
    if (k > 0 && !(sigma_[k] > sigma_[k - 1]))
      throw Error(Errc::kInvalidArgument, "zeta table sigma grid is not ascending");
    if (k > 0 && !(phi_[k] > phi_[k - 1]))
      throw Error(Errc::kNonMonotonePhi, "zeta table phi is not strictly increasing");
  }
}

bool ZetaTable::contains(double sigma) const noexcept {
  return sigma >= sigma_min() && sigma <= sigma_max();
}

std::size_t ZetaTable::segment(double sigma) const {
  if (!contains(sigma))
    throw Error(Errc::kSigmaOutOfTableRange, sigma_range_message(sigma, sigma_min(), sigma_max()));
  const auto it = std::upper_bound(sigma_.begin(), sigma_.end(), sigma);
  const std::size_t k = static_cast<std::size_t>(it - sigma_.begin());
  return std::min(k == 0 ? 0 : k - 1, sigma_.size() - 2);
}

double ZetaTable::exponent(std::size_t k) const {
  return std::log(phi_[k + 1] / phi_[k]) / std::log(sigma_[k + 1] / sigma_[k]);
}

double ZetaTable::phi(double sigma) const {
  const std::size_t k = segment(sigma);
  return phi_[k] * std::pow(sigma / sigma_[k], exponent(k));
}

double ZetaTable::log_zeta(double sigma) const {
  const std::size_t k = segment(sigma);
  // d(log ζ)/du = phi/σ² with u = log σ, which is exponential in u on the segment
  const double du = std::log(sigma / sigma_[k]);
  const double c = exponent(k) - 2.0;
  return log_zeta_[k] + phi_[k] / (sigma_[k] * sigma_[k]) * du * expm1_ratio(c * du);
}

double ZetaTable::inverse_phi(double target) const {
  if (!(target >= phi_min()) || !(target <= phi_max())) {
    const bool low = !(target >= phi_min());
    std::ostringstream os;
    os << "mean squared distance " << target << " outside tabulated phi range [" << phi_min()
       << ", " << phi_max() << "]";
    throw SigmaRangeError(os.str(), low ? sigma_min() : sigma_max());
  }
  // Bisection over the node table, then exact inversion of the segment power law.
  std::size_t lo = 0, hi = phi_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (phi_[mid] <= target ? lo : hi) = mid;
  }
  return sigma_[lo] * std::pow(target / phi_[lo], 1.0 / exponent(lo));
}

std::vector<double> log_spaced_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw Error(Errc::kInvalidArgument, "log_spaced_grid needs 0 < lo < hi and n >= 2");
  std::vector<double> grid(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int k = 0; k < n; ++k) grid[k] = std::exp(a + (b - a) * k / (n - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

ZetaTable build_zeta_table(int dim, const std::vector<double>& sigma_grid,
                           std::int64_t mc_samples, std::uint64_t seed,
                           const ZetaBuildOptions& options) {
  if (dim < 1) throw Error(Errc::kInvalidArgument, "zeta table dimension must be positive");
  if (mc_samples < 100000)
    throw Error(Errc::kInvalidArgument, "zeta table needs at least 1e5 Monte-Carlo samples");
  if (sigma_grid.size() < 32) throw Error(Errc::kInvalidArgument, "zeta grid needs >= 32 points");
  for (std::size_t k = 1; k < sigma_grid.size(); ++k)
    if (!(sigma_grid[k] > sigma_grid[k - 1]) || !(sigma_grid[0] > 0.0))
      throw Error(Errc::kInvalidArgument, "zeta grid must be positive and ascending");

  std::vector<Rng> streams;
  streams.reserve(sigma_grid.size());
  Rng root(seed);
  for (std::size_t k = 0; k < sigma_grid.size(); ++k) streams.push_back(split_stream(root));

  std::vector<double> raw(sigma_grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < sigma_grid.size(); k = next++)
      raw[k] = estimate_phi(dim, sigma_grid[k], mc_samples, streams[k], options.mh);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, sigma_grid.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::vector<double> phi = isotonic(raw);
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (std::abs(phi[k] - raw[k]) > options.max_repair * raw[k]) {
      std::ostringstream os;
      os << "monotone repair moved phi(" << sigma_grid[k] << ") from " << raw[k] << " to "
         << phi[k] << "; increase mc_samples";
      throw Error(Errc::kNonMonotonePhi, os.str());
    }
    if (k > 0) phi[k] = std::max(phi[k], std::nextafter(phi[k - 1], 2.0 * phi[k - 1]));
  }

  // log ζ ∝ σ^{d(d+1)/2} as σ → 0 anchors the first node.
  const double manifold_dim = 0.5 * dim * (dim + 1);
  std::vector<double> log_zeta(sigma_grid.size());
  log_zeta[0] = manifold_dim * std::log(sigma_grid[0]);
  for (std::size_t k = 0; k + 1 < sigma_grid.size(); ++k) {
    const double du = std::log(sigma_grid[k + 1] / sigma_grid[k]);
    const double c = std::log(phi[k + 1] / phi[k]) / du - 2.0;
    log_zeta[k + 1] =
        log_zeta[k] + phi[k] / (sigma_grid[k] * sigma_grid[k]) * du * expm1_ratio(c * du);
  }
  return ZetaTable(dim, sigma_grid, std::move(log_zeta), std::move(phi), mc_samples, seed);
}

void write_zeta_csv(const ZetaTable& table, std::ostream& out) {
  out << "dim,sigma,log_zeta,phi,mc_samples,seed,version\n";
  char line[256];
  for (std::size_t k = 0; k < table.sigma_grid().size(); ++k) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%lld,%llu,%d\n", table.dim(),
                  table.sigma_grid()[k], table.log_zeta_nodes()[k], table.phi_nodes()[k],
                  static_cast<long long>(table.mc_samples()),
                  static_cast<unsigned long long>(table.seed()), ZetaTable::kVersion);
    out << line;
  }
}

ZetaTable read_zeta_csv(std::istream& in, int expected_dim) {
  std::string line;
  if (!std::getline(in, line) || line != "dim,sigma,log_zeta,phi,mc_samples,seed,version")
    throw Error(Errc::kFormat, "zeta table: missing or unexpected header");
  int dim = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> sigma, log_zeta, phi;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[7];
    for (auto& c : cell) std::getline(fields, c, ',');
    try {
      const int d = std::stoi(cell[0]);
      const int version = std::stoi(cell[6]);
      if (version != ZetaTable::kVersion)
        throw Error(Errc::kFormat, "zeta table version " + cell[6] + " is not supported");
      if (sigma.empty()) {
        dim = d;
        samples = std::stoll(cell[4]);
        seed = std::stoull(cell[5]);
      } else if (d != dim) {
        throw Error(Errc::kFormat, "zeta table mixes dimensions");
      }
      sigma.push_back(std::stod(cell[1]));
      log_zeta.push_back(std::stod(cell[2]));
      phi.push_back(std::stod(cell[3]));
    } catch (const std::logic_error&) {
      throw Error(Errc::kFormat, "zeta table: malformed row " + std::to_string(row));
    }
  }
  if (expected_dim > 0 && dim != expected_dim) {
    std::ostringstream os;
    os << "zeta table has dim " << dim << ", expected " << expected_dim;
    throw Error(Errc::kFormat, os.str());
  }
  return ZetaTable(dim, std::move(sigma), std::move(log_zeta), std::move(phi), samples, seed);
}

double rgd_logpdf_from_dist_sq(double dist_sq, double sigma, const ZetaTable& table) {
  return -dist_sq / (2.0 * sigma * sigma) - table.log_zeta(sigma);
}

double rgd_logpdf(const SpdMatrix& y, const RgdParams& params, const ZetaTable& table) {
  if (y.dim() != table.dim() || params.center.dim() != table.dim())
    throw Error(Errc::kDimensionMismatch, "rgd_logpdf: matrix and table dimensions differ");
  return rgd_logpdf_from_dist_sq(rao_distance_sq(y, params.center), params.sigma, table);
}

std::vector<SpdMatrix> sample_rgd(const RgdParams& params, int n, Rng& rng,
                                  const MhConfig& config) {
  const int dim = static_cast<int>(params.center.dim());
  const RadialSamples radial = sample_radial(dim, params.sigma, n, rng, config);
  const BasePoint base(params.center);
  std::vector<SpdMatrix> out;
  out.reserve(n);
  for (const Vector& r : radial.draws) {
    if (r.cwiseAbs().maxCoeff() > 700.0)
      throw Error(Errc::kEntryOverflow, "radial draw too large to exponentiate");
    const Matrix u = haar_orthogonal(dim, rng);
    const SpdMatrix z =
        SpdMatrix::assume_spd(u * r.array().exp().matrix().asDiagonal() * u.transpose());
    out.push_back(base.unwhiten(z));
  }
  return out;
}

double mle_sigma(double mean_sq_dist, const ZetaTable& table) {
  return table.inverse_phi(mean_sq_dist);
}

double mle_sigma_clamped(double mean_sq_dist, const ZetaTable& table) {
  if (!(mean_sq_dist > table.phi_min())) return table.sigma_min();
  if (!(mean_sq_dist < table.phi_max())) return table.sigma_max();
  return table.inverse_phi(mean_sq_dist);
}

}  // namespace geoforge
