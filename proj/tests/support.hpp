// tests/support.hpp

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

// Shared fixtures: random SPD generators and cached zeta tables.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <unistd.h>
#include <random>
#include <string>

#include "geoforge/error.hpp"
#include "geoforge/rgd.hpp"
#include "geoforge/spd.hpp"

namespace geoforge::test {

inline Matrix random_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = n(rng);
  return m;
}

inline Matrix random_symmetric(int d, Rng& rng, double scale = 1.0) {
  const Matrix g = random_matrix(d, d, rng);
  return scale * 0.5 * (g + g.transpose());
}

/// exp of a random symmetric matrix: log-eigenvalues of order `scale`.
inline SpdMatrix random_spd(int d, Rng& rng, double scale = 0.7) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(random_symmetric(d, rng, scale));
  return SpdMatrix::assume_spd(es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                               es.eigenvectors().transpose());
}

/// Invertible matrix with condition number at most `cond`.
inline Matrix random_invertible(int d, Rng& rng, double cond = 100.0) {
  const Matrix u = Eigen::HouseholderQR<Matrix>(random_matrix(d, d, rng)).householderQ();
  const Matrix v = Eigen::HouseholderQR<Matrix>(random_matrix(d, d, rng)).householderQ();
  std::uniform_real_distribution<double> s(0.0, std::log(cond));
  Vector sv(d);
  for (int i = 0; i < d; ++i) sv(i) = std::exp(s(rng));
  sv(0) = 1.0;
  if (d > 1) sv(d - 1) = cond;
  return u * sv.asDiagonal() * v.transpose();
}

inline std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("GEOFORGE_CACHE"); env && *env) return env;
  return std::filesystem::temp_directory_path() / "geoforge-test-cache";
}

/// Table with 64 log-spaced nodes on [lo, hi], built once and cached.
inline ZetaTable zeta_table(int dim, double lo = 0.01, double hi = 5.0, long long samples = 100000,
                            std::uint64_t seed = 11) {
  const auto dir = cache_dir();
  std::filesystem::create_directories(dir);
  char name[128];
  std::snprintf(name, sizeof name, "test_zeta_d%d_%g_%g_%lld_%llu.csv", dim, lo, hi, samples,
                static_cast<unsigned long long>(seed));
  const auto file = dir / name;
  if (std::ifstream in(file); in) {
    try {
      return read_zeta_csv(in, dim);
    } catch (const std::exception&) {
    }
  }
  ZetaTable t = build_zeta_table(dim, log_spaced_grid(lo, hi, 64), samples, seed, {});
  const auto tmp = file.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp);
    write_zeta_csv(t, out);
  }
  std::filesystem::rename(tmp, file);
  return t;
}

}  // namespace geoforge::test

namespace geoforge::test {

/// Kind of the Error thrown by f, or nullopt when f returns normally.
template <class F>
std::optional<Errc> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double rel_err(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace geoforge::test
