// tests/test_metric.cpp

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

#include <doctest.h>

#include "geoforge/metric.hpp"
#include "geoforge/roc.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace geoforge;
using geoforge::test::error_of;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

PairBatch planted_batch(int dim, double a, Rng& rng, int L = 15) {
  RgmmModel m;
  m.dim = dim;
  for (int i = 0; i < 3; ++i) m.components.push_back({1.0 / 3, RgdParams(test::random_spd(dim, rng), 0.15)});
  return build_pairs(generate_population(m, {L, a}, rng), {}, rng);
}

}  // namespace

TEST_CASE("ab_divergence basics") {
  Rng rng(1);
  const SpdMatrix p = test::random_spd(4, rng);
  for (double a : {0.1, 0.5, 2.0})
    for (double b : {0.3, 1.0, 4.0}) CHECK(ab_divergence(p, p, a, b) == 0.0);

  CHECK(std::abs(ab_divergence(validate_spd(scalar(4)), validate_spd(scalar(1)), 0.5, 0.5) - 4.0 * std::log(1.25)) <
        1e-12);

  CHECK(error_of([&] { ab_divergence(p, p, 0.0, 1.0); }) == Errc::kNonPositiveAlphaBeta);
  CHECK(error_of([&] { ab_divergence(p, p, 1.0, -1.0); }) == Errc::kNonPositiveAlphaBeta);

  for (int k = 0; k < 100; ++k) {
    const SpdMatrix x = test::random_spd(4, rng), y = test::random_spd(4, rng);
    CHECK(ab_divergence(x, y, 0.7, 1.3) > 0.0);
  }
}

TEST_CASE("ab_divergence small-parameter limit improves as epsilon shrinks") {
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const SpdMatrix x = test::random_spd(5, rng), y = test::random_spd(5, rng);
    const double half = 0.5 * rao_distance_sq(x, y);
    const double e2 = std::abs(ab_divergence(x, y, 1e-2, 1e-2) - half) / (2 * half);
    const double e3 = std::abs(ab_divergence(x, y, 1e-3, 1e-3) - half) / (2 * half);
    CHECK(e3 < e2);
    CHECK(std::abs(ab_divergence(x, y, 1e-3, 1e-3) - half) / half < 1e-3);
  }
}

TEST_CASE("ab_divergence matches the spectrum formula and is congruence invariant") {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const SpdMatrix x = test::random_spd(4, rng), y = test::random_spd(4, rng);
    const double a = 0.3, b = 1.7;
    const Vector l = oracle::generalized_eigvals(x.matrix(), y.matrix());
    double want = 0;
    for (Eigen::Index i = 0; i < l.size(); ++i)
      want += std::log((a * std::pow(l(i), b) + b * std::pow(l(i), -a)) / (a + b));
    want /= a * b;
    const double got = ab_divergence(x, y, a, b);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
    const Matrix m = test::random_invertible(4, rng, 100.0);
    const double moved = ab_divergence(validate_spd(m * x.matrix() * m.transpose()),
                                       validate_spd(m * y.matrix() * m.transpose()), a, b);
    CHECK(std::abs(moved - got) / got < 1e-8);
  }
}

TEST_CASE("project_blocks and delta_distance") {
  Rng rng(4);
  const SpdMatrix y = test::random_spd(4, rng);
  const MetricModel one = MetricModel::single_block(4, {0.5, 0.5});
  const auto blocks = project_blocks(one, y);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].matrix() == y.matrix());

  MetricModel two;
  two.d = 4;
  two.m = 2;
  two.q = 2;
  Matrix w0 = Matrix::Zero(4, 2), w1 = Matrix::Zero(4, 2);
  w0(0, 0) = w0(1, 1) = 1.0;
  w1(2, 0) = w1(3, 1) = 1.0;
  two.W = {w0, w1};
  two.A = {{0.5, 0.5}, {1.0, 2.0}};
  two.sigma = Matrix::Identity(2, 2);
  CHECK_NOTHROW(check_metric_model(two));
  const auto split = project_blocks(two, y);
  CHECK(split[0].matrix() == y.matrix().topLeftCorner(2, 2));
  CHECK(split[1].matrix() == y.matrix().bottomRightCorner(2, 2));

  const Matrix q = Eigen::HouseholderQR<Matrix>(test::random_matrix(4, 4, rng)).householderQ();
  two.W = {q.leftCols(2), q.rightCols(2)};
  for (const SpdMatrix& b : project_blocks(two, y)) CHECK_NOTHROW(validate_spd(b.matrix()));

  const SpdMatrix x = test::random_spd(4, rng);
  CHECK(delta_distance(one, y, y) == 0.0);
  const double v = ab_divergence(x, y, 0.5, 0.5);
  CHECK(delta_distance(one, x, y) == doctest::Approx(v * v).epsilon(1e-12));

  MetricModel rotated = one;
  rotated.W = {haar_orthogonal(4, rng)};
  CHECK(std::abs(delta_distance(rotated, x, y) - v * v) / (v * v) < 1e-8);

  CHECK(error_of([&] { delta_distance(one, test::random_spd(3, rng), y); }) == Errc::kDimensionMismatch);
  MetricModel bad = one;
  bad.A = {{5.0, 1.0}};
  CHECK(error_of([&] { check_metric_model(bad); }).has_value());
}

TEST_CASE("alpha_beta_grid") {
  const auto g = alpha_beta_grid(TrainConfig{});
  REQUIRE(g.size() == 20);
  CHECK(g.front() == doctest::Approx(0.1));
  CHECK(g.back() == doctest::Approx(2.0));
}

TEST_CASE("train_metric on a separable batch keeps the grid minimum") {
  // Similar pairs are tiny perturbations, dissimilar pairs are far apart.
  Rng rng(5);
  PairBatch b;
  for (int k = 0; k < 30; ++k) {
    const SpdMatrix p = test::random_spd(3, rng);
    b.similar.push_back({p, validate_spd(p.matrix() * 1.001), 0});
    b.dissimilar.push_back({p, validate_spd(p.matrix() * 50.0), 0});
  }
  for (auto obj : {TrainConfig::Objective::kAuc, TrainConfig::Objective::kEer}) {
    TrainConfig cfg;
    cfg.objective = obj;
    const auto [model, report] = train_metric(b, 3, cfg, rng);
    CHECK(report.best.alpha == doctest::Approx(0.1));
    CHECK(report.best.beta == doctest::Approx(0.1));
    CHECK(report.validation_auc == 1.0);
    CHECK(report.validation_eer == 0.0);
    CHECK(report.grid_points == 400);
    CHECK(model.m == 1);
    CHECK(model.q == 3);
  }
}

TEST_CASE("train_metric under the permutation null") {
  Rng rng(6);
  const PairBatch b = planted_batch(3, 2.0, rng);
  std::vector<SpdPair> pool = b.similar;
  pool.insert(pool.end(), b.dissimilar.begin(), b.dissimilar.end());
  std::shuffle(pool.begin(), pool.end(), rng);
  PairBatch permuted;
  permuted.similar.assign(pool.begin(), pool.begin() + b.similar.size());
  permuted.dissimilar.assign(pool.begin() + b.similar.size(), pool.end());
  TrainConfig cfg;
  cfg.objective = TrainConfig::Objective::kAuc;
  const auto [model, report] = train_metric(permuted, 3, cfg, rng);
  const double n1 = report.validation_similar, n2 = report.validation_dissimilar;
  const double se = std::sqrt((n1 + n2 + 1) / (12 * n1 * n2));
  CHECK(std::abs(report.validation_auc - 0.5) < 3.0 * se);
}

TEST_CASE("train_metric prefers soft batches and is deterministic") {
  Rng rng(7);
  RgmmModel m;
  m.dim = 4;
  for (int i = 0; i < 3; ++i) m.components.push_back({1.0 / 3, RgdParams(test::random_spd(4, rng), 0.15)});
  Rng p1(1), p2(1);
  const PairBatch hard = build_pairs(generate_population(m, {15, 1.1}, p1), {}, p1);
  const PairBatch soft = build_pairs(generate_population(m, {15, 2.0}, p2), {}, p2);
  Rng t1(2), t2(2), t3(2);
  const auto h = train_metric(hard, 4, TrainConfig{}, t1);
  const auto s = train_metric(soft, 4, TrainConfig{}, t2);
  CHECK(s.second.validation_eer < h.second.validation_eer);
  const auto again = train_metric(soft, 4, TrainConfig{}, t3);
  CHECK(again.second.best.alpha == s.second.best.alpha);
  CHECK(again.second.best.beta == s.second.best.beta);
  CHECK(again.second.threshold == s.second.threshold);
}

TEST_CASE("train_metric errors") {
  Rng rng(8);
  PairBatch empty;
  CHECK(error_of([&] { train_metric(empty, 3, TrainConfig{}, rng); }) == Errc::kEmptyClass);
  PairBatch same;
  const SpdMatrix p = test::random_spd(3, rng);
  for (int k = 0; k < 10; ++k) {
    same.similar.push_back({p, p, 0});
    same.dissimilar.push_back({p, p, 0});
  }
  CHECK(error_of([&] { train_metric(same, 3, TrainConfig{}, rng); }) == Errc::kDegenerateScores);
}

TEST_CASE("score_pairs") {
  Rng rng(9);
  const PairBatch b = planted_batch(3, 1.5, rng, 5);
  const MetricModel model = MetricModel::single_block(3, {0.4, 1.2});
  const PairScores s = score_pairs(model, b);
  REQUIRE(s.similar.size() == b.similar.size());
  for (std::size_t k = 0; k < s.similar.size(); ++k) {
    CHECK(s.similar[k] >= 0.0);
    CHECK(s.similar[k] == delta_distance(model, b.similar[k].first, b.similar[k].second));
  }
  for (std::size_t k = 0; k < s.dissimilar.size(); ++k)
    CHECK(s.dissimilar[k] == delta_distance(model, b.dissimilar[k].first, b.dissimilar[k].second));
  PairBatch only = b;
  only.dissimilar.clear();
  CHECK(score_pairs(model, only).dissimilar.empty());
}
