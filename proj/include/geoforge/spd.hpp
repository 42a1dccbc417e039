// include/geoforge/spd.hpp

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

// Geometry of the manifold of symmetric positive definite matrices under the
// affine-invariant (Rao) metric.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace geoforge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The single random stream type used everywhere. Randomness is always passed
/// explicitly; nothing in the library touches a global generator.
using Rng = std::mt19937_64;

/// Derives an independent child stream; consumes one draw from the parent.
Rng split_stream(Rng& parent);

inline constexpr double kSymmetryTol = 1e-10;

/// A symmetric positive definite matrix. Instances are created through
/// validate_spd, or by library operations whose outputs are SPD by
/// construction.
class SpdMatrix {
 public:
  /// Wraps a matrix that is SPD by construction; only symmetrizes. Use
  /// validate_spd for anything coming from outside.
  static SpdMatrix assume_spd(Matrix m);
  static SpdMatrix identity(Eigen::Index dim);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  bool operator==(const SpdMatrix& other) const {
    return m_.rows() == other.m_.rows() && m_ == other.m_;
  }

 private:
  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// A symmetric matrix with no definiteness requirement (tangent vectors,
/// matrix logarithms).
class TangentSymmetric {
 public:
  static TangentSymmetric from_symmetric(Matrix m);
  static TangentSymmetric zero(Eigen::Index dim);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  explicit TangentSymmetric(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // orthogonal, columns are eigenvectors
};

SpdMatrix validate_spd(const Matrix& m, double tol = kSymmetryTol);

SymEig sym_eig(const Matrix& symmetric);
inline SymEig sym_eig(const SpdMatrix& m) { return sym_eig(m.matrix()); }
inline SymEig sym_eig(const TangentSymmetric& m) { return sym_eig(m.matrix()); }

enum class SpdFunc { kSqrt, kInvSqrt, kLog, kInv };

/// V·diag(f(λ))·Vᵀ for the scalar function named by `f`.
Matrix spd_func(const SpdMatrix& m, SpdFunc f);

SpdMatrix spd_sqrt(const SpdMatrix& m);
SpdMatrix spd_inv_sqrt(const SpdMatrix& m);
SpdMatrix spd_inv(const SpdMatrix& m);
TangentSymmetric spd_log(const SpdMatrix& m);

/// Matrix exponential of a symmetric matrix. Throws kEntryOverflow when an
/// eigenvalue exceeds 700 in magnitude.
SpdMatrix tangent_exp(const TangentSymmetric& s);

/// Eigenvalues of Q^{-1/2} P Q^{-1/2}, ascending.
Vector generalized_eigvals(const SpdMatrix& p, const SpdMatrix& q);

double rao_distance(const SpdMatrix& p, const SpdMatrix& q);
double rao_distance_sq(const SpdMatrix& p, const SpdMatrix& q);

/// A base point with its square root and inverse square root precomputed.
class BasePoint {
 public:
  explicit BasePoint(const SpdMatrix& m);

  const SpdMatrix& point() const noexcept { return point_; }
  const Matrix& sqrt() const noexcept { return sqrt_; }
  const Matrix& inv_sqrt() const noexcept { return inv_sqrt_; }

  /// M^{-1/2} X M^{-1/2}
  SpdMatrix whiten(const SpdMatrix& x) const;
  /// M^{1/2} Z M^{1/2}
  SpdMatrix unwhiten(const SpdMatrix& z) const;
  /// log(M^{-1/2} X M^{-1/2})
  TangentSymmetric log_map(const SpdMatrix& x) const;
  double distance_sq(const SpdMatrix& x) const;

 private:
  SpdMatrix point_;
  Matrix sqrt_;
  Matrix inv_sqrt_;
};

/// Wᵀ Y W for W with orthonormal columns (kNotOrthonormal otherwise).
SpdMatrix congruence(const Matrix& w, const SpdMatrix& y);

struct KarcherOptions {
  double tol = 1e-9;
  int max_iter = 200;
};

/// Weighted Fréchet mean under the Rao metric via the unit-step fixed point
/// M ← M^{1/2} exp(Σ w_n log(M^{-1/2} X_n M^{-1/2})) M^{1/2}. Stops once the
/// Frobenius norm of the tangent average drops below tol. Weights are
/// normalized internally; zero-weight points are skipped.
SpdMatrix karcher_mean(std::span<const SpdMatrix> points, std::span<const double> weights,
                       const KarcherOptions& options = {},
                       const std::optional<SpdMatrix>& init = std::nullopt);

SpdMatrix karcher_mean(std::span<const SpdMatrix> points, const KarcherOptions& options = {});

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the sign of diag(R) folded into Q.
Matrix haar_orthogonal(Eigen::Index dim, Rng& rng);

}  // namespace geoforge
