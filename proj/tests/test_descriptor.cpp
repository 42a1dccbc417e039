// tests/test_descriptor.cpp

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

#include <sstream>

#include "geoforge/descriptor.hpp"
#include "geoforge/image.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace geoforge;
using geoforge::test::error_of;

namespace {

/// A loopy pen trace on a white canvas, offset by (ox, oy).
GrayImage stroke_image(int w, int h, int ox, int oy, std::uint64_t seed = 1) {
  GrayImage img(w, h, 1.0);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int k = 0; k < 400; ++k) {
    const double t = k / 400.0 * 6.283;
    const int x = ox + static_cast<int>(18 + 15 * std::sin(2 * t) + 4 * std::cos(5 * t));
    const int y = oy + static_cast<int>(10 + 8 * std::cos(3 * t));
    for (int dx = 0; dx < 2; ++dx)
      if (x + dx < w && y < h) img.at(x + dx, y) = u(rng);
  }
  return img;
}

GrayImage random_image(int w, int h, Rng& rng) {
  GrayImage img(w, h);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : img.pixels) v = u(rng);
  return img;
}

double at_clamped(const GrayImage& g, int x, int y) { return g.at(x, y); }

/// Independent stencil evaluation for one pixel.
std::array<double, 10> stencil(const GrayImage& g, int x, int y) {
  const int w = g.width, h = g.height;
  double ix, iy, ixx, iyy;
  if (x == 0) ix = at_clamped(g, 1, y) - at_clamped(g, 0, y);
  else if (x == w - 1) ix = at_clamped(g, w - 1, y) - at_clamped(g, w - 2, y);
  else ix = (at_clamped(g, x + 1, y) - at_clamped(g, x - 1, y)) / 2;
  if (y == 0) iy = at_clamped(g, x, 1) - at_clamped(g, x, 0);
  else if (y == h - 1) iy = at_clamped(g, x, h - 1) - at_clamped(g, x, h - 2);
  else iy = (at_clamped(g, x, y + 1) - at_clamped(g, x, y - 1)) / 2;
  const int cx = std::min(std::max(x, 1), w - 2), cy = std::min(std::max(y, 1), h - 2);
  ixx = g.at(cx + 1, y) - 2 * g.at(cx, y) + g.at(cx - 1, y);
  iyy = g.at(x, cy + 1) - 2 * g.at(x, cy) + g.at(x, cy - 1);
  return {static_cast<double>(x) / (w - 1), static_cast<double>(y) / (h - 1), g.at(x, y), std::abs(ix),
          std::abs(iy), std::abs(ixx), std::abs(iyy), std::sqrt(ix * ix + iy * iy),
          std::atan(std::abs(iy) / (std::abs(ix) + 1e-6)), ixx + iyy};
}

}  // namespace

TEST_CASE("PGM input and output") {
  GrayImage img(3, 2);
  img.pixels = {0.0, 0.2, 1.0, 0.5, 0.8, 0.4};
  std::stringstream buf;
  write_pgm(img, buf);
  const GrayImage back = read_pgm(buf);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  for (std::size_t k = 0; k < img.pixels.size(); ++k)
    CHECK(std::abs(back.pixels[k] - img.pixels[k]) <= 0.5 / 255 + 1e-12);

  std::istringstream ascii("P2\n# comment\n2 2\n# another\n10\n0 5\n10 2\n");
  const GrayImage a = read_pgm(ascii);
  CHECK(a.at(1, 0) == doctest::Approx(0.5));
  CHECK(a.at(0, 1) == 1.0);

  std::istringstream bad("P6\n1 1\n255\nabc");
  CHECK(error_of([&] { read_pgm(bad); }) == Errc::kFormat);
  std::istringstream truncated("P5\n4 4\n255\nab");
  CHECK(error_of([&] { read_pgm(truncated); }) == Errc::kFormat);
  CHECK(error_of([] { read_image("/nonexistent/file.pgm"); }) == Errc::kIo);

  GrayImage out_of_range(1, 1, 1.5);
  CHECK(error_of([&] { check_image(out_of_range); }) == Errc::kInvalidArgument);
}

TEST_CASE("otsu_bin matches the within-class variance oracle") {
  Rng rng(1);
  std::normal_distribution<double> dark(0.2, 0.08), light(0.85, 0.05);
  for (int trial = 0; trial < 30; ++trial) {
    GrayImage img(20, 15);
    std::vector<int> bins;
    std::bernoulli_distribution ink(0.3);
    for (double& v : img.pixels) {
      v = std::clamp(ink(rng) ? dark(rng) : light(rng), 0.0, 1.0);
      bins.push_back(intensity_bin(v));
    }
    CHECK(otsu_bin(img) == oracle::otsu_within_class(bins));
  }
  CHECK(otsu_bin(GrayImage(4, 4, 0.3)) == -1);
}

TEST_CASE("preprocess") {
  CHECK(error_of([] { preprocess(GrayImage(10, 10, 1.0)); }) == Errc::kBlankImage);

  GrayImage rect(30, 20, 1.0);
  for (int y = 5; y < 12; ++y)
    for (int x = 8; x < 20; ++x) rect.at(x, y) = 0.0;
  const Preprocessed p = preprocess(rect);
  CHECK(p.crop == Rect{6, 3, 22, 14});
  CHECK(p.mask.count() == 12 * 7);
  CHECK(p.image.at(2, 2) == 1.0);
  CHECK(p.image.at(0, 0) == 0.0);

  const GrayImage s = stroke_image(50, 30, 3, 4);
  const Preprocessed q = preprocess(s);
  std::size_t brute = 0;
  for (double v : s.pixels) brute += intensity_bin(v) <= q.threshold_bin;
  CHECK(q.mask.count() == brute);
}

TEST_CASE("feature_channels") {
  const FeatureStack flat = feature_channels(GrayImage(6, 5, 0.4));
  CHECK(flat.values.rows() == 30);
  CHECK(flat.catalog == "standard10");
  for (int c : {3, 4, 5, 6, 7, 9}) CHECK(flat.values.col(c).cwiseAbs().maxCoeff() == 0.0);

  GrayImage ramp(8, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) ramp.at(x, y) = x / 7.0;
  const FeatureStack r = feature_channels(ramp);
  CHECK((r.values.col(3).array() - 1.0 / 7).abs().maxCoeff() < 1e-15);
  CHECK(r.values.col(4).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(2);
  const GrayImage img = random_image(9, 7, rng);
  const FeatureStack st = feature_channels(img);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) {
      const auto want = stencil(img, x, y);
      for (int c = 0; c < 10; ++c) CHECK(st.values(y * 9 + x, c) == doctest::Approx(want[c]).epsilon(1e-15));
    }
}

TEST_CASE("covariance_descriptor") {
  Rng rng(3);
  const GrayImage img = random_image(12, 10, rng);
  const FeatureStack st = feature_channels(img);
  InkMask mask{12, 10, std::vector<std::uint8_t>(120, 0)};
  mask.ink[3 * 12 + 4] = 1;
  mask.ink[7 * 12 + 9] = 1;
  const SpdMatrix two = covariance_descriptor(st, mask, {0, 0, 12, 10}, 2);
  const auto a = st.values.row(3 * 12 + 4), b = st.values.row(7 * 12 + 9);
  const Matrix raw = 0.5 * (a - b).transpose() * (a - b);
  const double shrink = kShrinkEps * (raw.trace() / 10 + kShrinkDelta);
  // Channels I (2) and x̃ (0).
  CHECK(two(2, 2) == doctest::Approx(0.5 * std::pow(a(2) - b(2), 2) + shrink).epsilon(1e-12));
  CHECK(two(0, 2) == doctest::Approx(0.5 * (a(0) - b(0)) * (a(2) - b(2))).epsilon(1e-12));
  CHECK(two(0, 0) == doctest::Approx(0.5 * std::pow(5.0 / 11, 2) + shrink).epsilon(1e-12));

  // Constant channels on the mask give the shrinkage floor only.
  const FeatureStack flat = feature_channels(GrayImage(12, 10, 0.5));
  InkMask one_px{12, 10, std::vector<std::uint8_t>(120, 0)};
  for (int y = 0; y < 10; ++y) one_px.ink[y * 12 + 5] = 1;
  FeatureStack masked = flat;
  masked.values.col(1).setZero();
  masked.values.col(0).setZero();
  const SpdMatrix floor = covariance_descriptor(masked, one_px, {0, 0, 12, 10}, 2);
  CHECK(test::rel_err(floor.matrix(), kShrinkEps * kShrinkDelta * Matrix::Identity(10, 10)) < 1e-12);

  // Against the naive covariance on a larger mask.
  std::bernoulli_distribution coin(0.5);
  InkMask rnd{12, 10, std::vector<std::uint8_t>(120, 0)};
  for (auto& v : rnd.ink) v = coin(rng);
  std::vector<int> rows;
  for (int k = 0; k < 120; ++k)
    if (rnd.ink[k]) rows.push_back(k);
  Matrix samples(rows.size(), 10);
  for (std::size_t k = 0; k < rows.size(); ++k) samples.row(k) = st.values.row(rows[k]);
  Matrix want = oracle::covariance(samples);
  want.diagonal().array() += kShrinkEps * (want.trace() / 10 + kShrinkDelta);
  const SpdMatrix got = covariance_descriptor(st, rnd, {0, 0, 12, 10});
  CHECK(test::rel_err(got.matrix(), want) < 1e-12);

  // Pixel enumeration order does not matter.
  Matrix permuted = samples;
  std::vector<int> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < order.size(); ++k) permuted.row(k) = samples.row(order[k]);
  Matrix want_perm = oracle::covariance(permuted);
  want_perm.diagonal().array() += kShrinkEps * (want_perm.trace() / 10 + kShrinkDelta);
  CHECK(test::rel_err(got.matrix(), want_perm) < 1e-12);

  InkMask few{12, 10, std::vector<std::uint8_t>(120, 0)};
  few.ink[0] = 1;
  CHECK(error_of([&] { covariance_descriptor(st, few, {0, 0, 12, 10}); }) == Errc::kTooFewInkPixels);
}

TEST_CASE("quantile cuts and the equimass pyramid") {
  InkMask uniform{12, 9, std::vector<std::uint8_t>(108, 1)};
  const auto u = equimass_pyramid(uniform);
  CHECK(u[0] == Rect{0, 0, 12, 9});
  CHECK(u[1] == Rect{0, 0, 6, 4});  // 4 and 5 rows tie for the midpoint; the lower cut wins
  CHECK(u[5] == Rect{0, 0, 4, 3});
  CHECK(u[13] == Rect{8, 6, 12, 9});

  InkMask left{20, 10, std::vector<std::uint8_t>(200, 0)};
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) left.ink[y * 20 + x] = 1;
  const auto l = equimass_pyramid(left);
  CHECK(l[1].x1 == 5);
  CHECK(l[1].x1 < 10);

  Rng rng(4);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    InkMask m{17, 13, std::vector<std::uint8_t>(17 * 13, 0)};
    for (auto& v : m.ink) v = coin(rng);
    if (m.count() == 0) continue;
    const auto r = equimass_pyramid(m);
    for (int level : {0, 1, 2}) {
      const int start = level == 0 ? 0 : level == 1 ? 1 : 5;
      const int n = level == 0 ? 1 : level == 1 ? 4 : 9;
      std::vector<int> cover(17 * 13, 0);
      for (int g = start; g < start + n; ++g)
        for (int y = r[g].y0; y < r[g].y1; ++y)
          for (int x = r[g].x0; x < r[g].x1; ++x) ++cover[y * 17 + x];
      for (int c : cover) CHECK(c == 1);
    }
    // Column marginal at the 2x2 split sits within half a column of 50%.
    std::vector<double> cols(17, 0.0);
    for (int y = 0; y < 13; ++y)
      for (int x = 0; x < 17; ++x) cols[x] += m.at(x, y);
    double cum = 0;
    for (int x = 0; x < r[1].x1; ++x) cum += cols[x];
    const double total = static_cast<double>(m.count());
    const double straddle = *std::max_element(cols.begin(), cols.end());
    CHECK(std::abs(cum - total / 2) <= straddle / 2 + 1e-12);
  }

  const auto cuts = quantile_cuts({0, 0, 0, 0, 10}, 3);
  CHECK(cuts == std::vector<int>{0, 1, 2, 5});
}

TEST_CASE("image_to_pyramid") {
  const GrayImage s = stroke_image(50, 30, 3, 4);
  const PyramidDescriptors p = image_to_pyramid(s);
  REQUIRE(p.regions.size() == 14);
  for (const SpdMatrix& r : p.regions) {
    CHECK(r.dim() == 10);
    CHECK_NOTHROW(validate_spd(r.matrix()));
  }
  const Preprocessed pre = preprocess(s);
  const SpdMatrix whole = covariance_descriptor(feature_channels(pre.image), pre.mask,
                                                {0, 0, pre.mask.width, pre.mask.height});
  CHECK(p.regions[0] == whole);
  const PyramidDescriptors again = image_to_pyramid(s);
  for (int g = 0; g < 14; ++g) CHECK(again.regions[g] == p.regions[g]);

  // A padded canvas with the same stroke gives the same pyramid.
  const PyramidDescriptors shifted = image_to_pyramid(stroke_image(90, 60, 25, 17));
  for (int g = 0; g < 14; ++g) CHECK(test::rel_err(shifted.regions[g].matrix(), p.regions[g].matrix()) < 1e-12);

  // Ink confined to one corner starves the other cells.
  GrayImage corner(40, 40, 1.0);
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      if ((x < 12 && y < 12) || (x == 39 && y == 39)) corner.at(x, y) = u(rng);
  const PyramidDescriptors c = image_to_pyramid(corner);
  bool any = false;
  for (int g = 1; g < 14; ++g)
    if (c.fallback[g]) {
      any = true;
      CHECK(c.regions[g] == c.regions[0]);
    }
  CHECK(any);
  CHECK_FALSE(c.fallback[0]);

  std::ostringstream out;
  write_pyramid_jsonl("img", p, out);
  const std::string first = out.str().substr(0, out.str().find('\n'));
  CHECK(first.find("\"image_id\":\"img\"") != std::string::npos);
  CHECK(first.find("\"g\":1") != std::string::npos);
}
