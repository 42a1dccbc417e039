// include/geoforge/rgd.hpp

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

// Riemannian Gaussian distribution G(M, σ) on the SPD manifold, with density
// proportional to exp(-d²(Y, M) / 2σ²).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "geoforge/spd.hpp"

namespace geoforge {

struct RgdParams {
  RgdParams(SpdMatrix center, double sigma);

  SpdMatrix center;
  double sigma;
};

/// Metropolis-Hastings settings for the radial chain. The per-coordinate
/// proposal standard deviation is step_scale·σ/√d.
struct MhConfig {
  double step_scale = 1.6;
  int burn_in = 1000;
  int thin = 5;
};

/// Unnormalized log-density of the log-eigenvalues r of M^{-1/2} Y M^{-1/2}:
///   -‖r‖²/(2σ²) + Σ_{i<j} log sinh(|r_i - r_j| / 2).
/// Returns -inf when two coordinates coincide.
double radial_log_density(const Vector& r, double sigma);

struct RadialSamples {
  std::vector<Vector> draws;
  double acceptance_rate = 0.0;
};

RadialSamples sample_radial(int dim, double sigma, int n, Rng& rng, const MhConfig& config = {});

/// Tabulated normalizing factor. log_zeta holds log ζ(σ) up to a
/// σ-independent constant; phi(σ) = σ³ d(log ζ)/dσ equals the mean squared
/// Rao distance to the center under G(M, σ).
///
/// Between nodes phi is interpolated as a power law in σ, and log ζ is the
/// exact integral of phi(s)/s³ along that interpolant, so the two stay
/// consistent everywhere inside the grid.
class ZetaTable {
 public:
  static constexpr int kVersion = 1;

  /// Validates and adopts tabulated nodes (ascending σ, strictly increasing
  /// phi, at least 32 nodes).
  ZetaTable(int dim, std::vector<double> sigma, std::vector<double> log_zeta,
            std::vector<double> phi, std::int64_t mc_samples, std::uint64_t seed);

  int dim() const noexcept { return dim_; }
  std::int64_t mc_samples() const noexcept { return mc_samples_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const double> sigma_grid() const noexcept { return sigma_; }
  std::span<const double> log_zeta_nodes() const noexcept { return log_zeta_; }
  std::span<const double> phi_nodes() const noexcept { return phi_; }
  double sigma_min() const noexcept { return sigma_.front(); }
  double sigma_max() const noexcept { return sigma_.back(); }
  double phi_min() const noexcept { return phi_.front(); }
  double phi_max() const noexcept { return phi_.back(); }

  bool contains(double sigma) const noexcept;
  /// Both throw kSigmaOutOfTableRange outside [sigma_min, sigma_max].
  double log_zeta(double sigma) const;
  double phi(double sigma) const;

  /// Inverse of phi; throws SigmaRangeError outside [phi_min, phi_max].
  double inverse_phi(double mean_sq_dist) const;

 private:
  std::size_t segment(double sigma) const;
  double exponent(std::size_t k) const;

  int dim_;
  std::vector<double> sigma_;
  std::vector<double> log_zeta_;
  std::vector<double> phi_;
  std::int64_t mc_samples_;
  std::uint64_t seed_;
};

struct ZetaBuildOptions {
  MhConfig mh{};
  unsigned jobs = 1;
  /// Relative change allowed when the monotone repair of phi kicks in.
  double max_repair = 0.05;
};

/// n log-spaced points on [lo, hi].
std::vector<double> log_spaced_grid(double lo, double hi, int n);

/// Estimates phi at every grid node from an independent Metropolis-Hastings
/// chain of mc_samples retained states, then integrates phi(σ)/σ³ for
/// log ζ. Throws kNonMonotonePhi if the monotone repair moves any node by more
/// than max_repair.
/// Each node chain runs on its own stream split from `seed`, which is also
/// recorded in the table.
ZetaTable build_zeta_table(int dim, const std::vector<double>& sigma_grid,
                           std::int64_t mc_samples, std::uint64_t seed,
                           const ZetaBuildOptions& options = {});

/// CSV with header `dim,sigma,log_zeta,phi,mc_samples,seed,version`.
void write_zeta_csv(const ZetaTable& table, std::ostream& out);
/// Refuses a version other than kVersion, or a dim other than the expected one
/// when expected_dim > 0.
ZetaTable read_zeta_csv(std::istream& in, int expected_dim = 0);

/// -d²(Y, M)/(2σ²) - log ζ(σ)
double rgd_logpdf(const SpdMatrix& y, const RgdParams& params, const ZetaTable& table);
double rgd_logpdf_from_dist_sq(double dist_sq, double sigma, const ZetaTable& table);

/// Draws Y = M^{1/2} U diag(exp r) Uᵀ M^{1/2} with r from the radial chain and U
/// Haar-distributed.
std::vector<SpdMatrix> sample_rgd(const RgdParams& params, int n, Rng& rng,
                                  const MhConfig& config = {});

/// Maximum-likelihood dispersion for a given mean squared distance, i.e. the
/// σ solving phi(σ) = mean_sq_dist. Throws SigmaRangeError when out of range.
double mle_sigma(double mean_sq_dist, const ZetaTable& table);
/// Same, but clamps to the table endpoints instead of throwing.
double mle_sigma_clamped(double mean_sq_dist, const ZetaTable& table);

}  // namespace geoforge
