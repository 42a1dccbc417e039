// src/spd.cpp

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

#include "geoforge/spd.hpp"

#include <cmath>
#include <sstream>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix from_spectrum(const SymEig& eig, const Vector& values) {
  return symmetrized(eig.vectors * values.asDiagonal() * eig.vectors.transpose());
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(Errc::kDimensionMismatch, os.str());
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimensions " << a << " and " << b << " differ";
    throw Error(Errc::kDimensionMismatch, os.str());
  }
}

}  // namespace

Rng split_stream(Rng& parent) {
  // Seed sequence mixing keeps children decorrelated from the parent state.
  std::seed_seq seq{parent(), parent()};
  return Rng(seq);
}

SpdMatrix SpdMatrix::assume_spd(Matrix m) { return SpdMatrix(symmetrized(m)); }

SpdMatrix SpdMatrix::identity(Eigen::Index dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }

TangentSymmetric TangentSymmetric::from_symmetric(Matrix m) {
  require_square(m, "TangentSymmetric");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    throw Error(Errc::kNotSymmetric, "tangent matrix is not symmetric");
  return TangentSymmetric(symmetrized(m));
}

TangentSymmetric TangentSymmetric::zero(Eigen::Index dim) {
  return TangentSymmetric(Matrix::Zero(dim, dim));
}

SpdMatrix validate_spd(const Matrix& m, double tol) {
  require_square(m, "validate_spd");
  if (!m.allFinite()) throw Error(Errc::kNotPositiveDefinite, "matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    std::ostringstream os;
    os << "max asymmetry " << asym << " exceeds " << tol * scale;
    throw Error(Errc::kNotSymmetric, os.str());
  }
  Matrix s = symmetrized(m);
  const SymEig eig = sym_eig(s);
  const double trace = s.trace();
  const double floor = 1e-12 * trace / static_cast<double>(s.rows());
  const double smallest = eig.values(0);
  if (trace <= 0.0 || smallest <= floor) {
    std::ostringstream os;
    os << "smallest eigenvalue " << smallest << " is not above floor " << floor;
    throw Error(Errc::kNotPositiveDefinite, os.str());
  }
  return SpdMatrix::assume_spd(std::move(s));
}

SymEig sym_eig(const Matrix& symmetric) {
  require_square(symmetric, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::kConvergenceFailure, "symmetric eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix spd_func(const SpdMatrix& m, SpdFunc f) {
  const SymEig eig = sym_eig(m);
  Vector values = eig.values;
  switch (f) {
    case SpdFunc::kSqrt: values = values.array().sqrt(); break;
    case SpdFunc::kInvSqrt: values = values.array().sqrt().inverse(); break;
    case SpdFunc::kLog: values = values.array().log(); break;
    case SpdFunc::kInv: values = values.array().inverse(); break;
  }
  return from_spectrum(eig, values);
}

SpdMatrix spd_sqrt(const SpdMatrix& m) { return SpdMatrix::assume_spd(spd_func(m, SpdFunc::kSqrt)); }

SpdMatrix spd_inv_sqrt(const SpdMatrix& m) {
  return SpdMatrix::assume_spd(spd_func(m, SpdFunc::kInvSqrt));
}

SpdMatrix spd_inv(const SpdMatrix& m) { return SpdMatrix::assume_spd(spd_func(m, SpdFunc::kInv)); }

TangentSymmetric spd_log(const SpdMatrix& m) {
  return TangentSymmetric::from_symmetric(spd_func(m, SpdFunc::kLog));
}

SpdMatrix tangent_exp(const TangentSymmetric& s) {
  const SymEig eig = sym_eig(s);
  const double extreme = eig.values.cwiseAbs().maxCoeff();
  if (extreme > 700.0) {
    std::ostringstream os;
    os << "eigenvalue magnitude " << extreme << " exceeds 700";
    throw Error(Errc::kEntryOverflow, os.str());
  }
  return SpdMatrix::assume_spd(from_spectrum(eig, eig.values.array().exp().matrix()));
}

BasePoint::BasePoint(const SpdMatrix& m) : point_(m) {
  const SymEig eig = sym_eig(m);
  const Vector root = eig.values.array().sqrt();
  sqrt_ = from_spectrum(eig, root);
  inv_sqrt_ = from_spectrum(eig, root.array().inverse().matrix());
}

SpdMatrix BasePoint::whiten(const SpdMatrix& x) const {
  require_same_dim(x.dim(), point_.dim(), "whiten");
  return SpdMatrix::assume_spd(inv_sqrt_ * x.matrix() * inv_sqrt_);
}

SpdMatrix BasePoint::unwhiten(const SpdMatrix& z) const {
  require_same_dim(z.dim(), point_.dim(), "unwhiten");
  return SpdMatrix::assume_spd(sqrt_ * z.matrix() * sqrt_);
}

TangentSymmetric BasePoint::log_map(const SpdMatrix& x) const { return spd_log(whiten(x)); }

double BasePoint::distance_sq(const SpdMatrix& x) const {
  const SymEig eig = sym_eig(whiten(x));
  return eig.values.array().log().square().sum();
}

Vector generalized_eigvals(const SpdMatrix& p, const SpdMatrix& q) {
  require_same_dim(p.dim(), q.dim(), "generalized_eigvals");
  const Matrix w = spd_func(q, SpdFunc::kInvSqrt);
  return sym_eig(symmetrized(w * p.matrix() * w)).values;
}

double rao_distance_sq(const SpdMatrix& p, const SpdMatrix& q) {
  if (p == q) return 0.0;
  return generalized_eigvals(p, q).array().log().square().sum();
}

double rao_distance(const SpdMatrix& p, const SpdMatrix& q) {
  return std::sqrt(rao_distance_sq(p, q));
}

SpdMatrix congruence(const Matrix& w, const SpdMatrix& y) {
  require_same_dim(w.rows(), y.dim(), "congruence");
  const Matrix gram = w.transpose() * w;
  const double residual = (gram - Matrix::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff();
  if (residual > kSymmetryTol) {
    std::ostringstream os;
    os << "projection columns deviate from orthonormal by " << residual;
    throw Error(Errc::kNotOrthonormal, os.str());
  }
  return SpdMatrix::assume_spd(w.transpose() * y.matrix() * w);
}

SpdMatrix karcher_mean(std::span<const SpdMatrix> points, std::span<const double> weights,
                       const KarcherOptions& options, const std::optional<SpdMatrix>& init) {
  if (points.empty()) throw Error(Errc::kInvalidArgument, "karcher_mean of an empty set");
  if (points.size() != weights.size())
    throw Error(Errc::kDimensionMismatch, "karcher_mean: points and weights differ in length");
  const Eigen::Index dim = points.front().dim();
  double total = 0.0;
  for (std::size_t n = 0; n < points.size(); ++n) {
    require_same_dim(points[n].dim(), dim, "karcher_mean");
    if (!(weights[n] >= 0.0)) throw Error(Errc::kInvalidArgument, "negative Karcher weight");
    total += weights[n];
  }
  if (!(total > 0.0)) throw Error(Errc::kInvalidArgument, "Karcher weights sum to zero");

  SpdMatrix mean = init.value_or(SpdMatrix::identity(dim));
  if (!init) {
    Matrix arithmetic = Matrix::Zero(dim, dim);
    for (std::size_t n = 0; n < points.size(); ++n)
      arithmetic += (weights[n] / total) * points[n].matrix();
    mean = SpdMatrix::assume_spd(std::move(arithmetic));
  }

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const BasePoint base(mean);
    Matrix gradient = Matrix::Zero(dim, dim);
    for (std::size_t n = 0; n < points.size(); ++n) {
      if (weights[n] == 0.0) continue;
      gradient += (weights[n] / total) * base.log_map(points[n]).matrix();
    }
    if (gradient.norm() < options.tol) return mean;
    mean = base.unwhiten(tangent_exp(TangentSymmetric::from_symmetric(std::move(gradient))));
  }
  std::ostringstream os;
  os << "Karcher iteration did not reach tol " << options.tol << " within " << options.max_iter
     << " iterations";
  throw Error(Errc::kNoConvergence, os.str());
}

SpdMatrix karcher_mean(std::span<const SpdMatrix> points, const KarcherOptions& options) {
  const std::vector<double> weights(points.size(), 1.0);
  return karcher_mean(points, weights, options);
}

Matrix haar_orthogonal(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace geoforge
