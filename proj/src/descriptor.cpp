// src/descriptor.cpp

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

#include "geoforge/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

// First difference along a line of n samples accessed through f(i).
template <class F>
double first_diff(F f, int i, int n) {
  if (n < 2) return 0.0;
  if (i == 0) return f(1) - f(0);
  if (i == n - 1) return f(n - 1) - f(n - 2);
  return 0.5 * (f(i + 1) - f(i - 1));
}

template <class F>
double second_diff(F f, int i, int n) {
  if (n < 3) return 0.0;
  const int c = std::clamp(i, 1, n - 2);
  return f(c + 1) - 2.0 * f(c) + f(c - 1);
}

}  // namespace

std::size_t InkMask::count() const {
  return static_cast<std::size_t>(std::count(ink.begin(), ink.end(), std::uint8_t{1}));
}

int intensity_bin(double v) { return static_cast<int>(std::clamp(std::lround(v * 255.0), 0L, 255L)); }

int otsu_bin(const GrayImage& image) {
  std::array<double, 256> hist{};
  for (double v : image.pixels) hist[intensity_bin(v)] += 1.0;
  const double total = static_cast<double>(image.pixels.size());
  double sum_all = 0.0;
  for (int b = 0; b < 256; ++b) sum_all += b * hist[b];

  int best = -1;
  double best_var = 0.0, w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best = t;
    }
  }
  return best;
}

Preprocessed preprocess(const GrayImage& image) {
  check_image(image);
  const int t = otsu_bin(image);
  if (t < 0) throw Error(Errc::kBlankImage, "image has a single intensity level, no ink found");

  int x0 = image.width, y0 = image.height, x1 = -1, y1 = -1;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (intensity_bin(image.at(x, y)) <= t) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw Error(Errc::kBlankImage, "no ink pixels below the Otsu threshold");

  Preprocessed out;
  out.threshold_bin = t;
  out.crop = {std::max(0, x0 - kCropMargin), std::max(0, y0 - kCropMargin),
              std::min(image.width, x1 + 1 + kCropMargin), std::min(image.height, y1 + 1 + kCropMargin)};
  const int w = out.crop.width(), h = out.crop.height();
  out.image = GrayImage(w, h);
  out.mask = {w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = image.at(out.crop.x0 + x, out.crop.y0 + y);
      out.image.at(x, y) = 1.0 - v;
      out.mask.ink[static_cast<std::size_t>(y) * w + x] = intensity_bin(v) <= t ? 1 : 0;
    }
  return out;
}

const ChannelCatalog& standard_catalog() {
  static const ChannelCatalog catalog{
      "standard10",
      {
          {"x", [](const PixelContext& p) { return p.x_norm; }},
          {"y", [](const PixelContext& p) { return p.y_norm; }},
          {"I", [](const PixelContext& p) { return p.intensity; }},
          {"abs_Ix", [](const PixelContext& p) { return std::abs(p.ix); }},
          {"abs_Iy", [](const PixelContext& p) { return std::abs(p.iy); }},
          {"abs_Ixx", [](const PixelContext& p) { return std::abs(p.ixx); }},
          {"abs_Iyy", [](const PixelContext& p) { return std::abs(p.iyy); }},
          {"grad_mag", [](const PixelContext& p) { return std::hypot(p.ix, p.iy); }},
          {"grad_orient", [](const PixelContext& p) { return std::atan(std::abs(p.iy) / (std::abs(p.ix) + 1e-6)); }},
          {"laplacian", [](const PixelContext& p) { return p.ixx + p.iyy; }},
      }};
  return catalog;
}

FeatureStack feature_channels(const GrayImage& image, const ChannelCatalog& catalog) {
  check_image(image);
  if (static_cast<int>(catalog.channels.size()) != kChannels)
    throw Error(Errc::kInvalidArgument, "channel catalog must define exactly 10 channels");
  const int w = image.width, h = image.height;
  FeatureStack stack;
  stack.width = w;
  stack.height = h;
  stack.catalog = catalog.name;
  for (const auto& ch : catalog.channels) stack.names.push_back(ch.first);
  stack.values.resize(static_cast<Eigen::Index>(w) * h, kChannels);

  for (int y = 0; y < h; ++y) {
    const auto row = [&](int i) { return image.at(i, y); };
    for (int x = 0; x < w; ++x) {
      const auto col = [&](int j) { return image.at(x, j); };
      const PixelContext p{w > 1 ? static_cast<double>(x) / (w - 1) : 0.0,
                           h > 1 ? static_cast<double>(y) / (h - 1) : 0.0,
                           image.at(x, y),
                           first_diff(row, x, w),
                           first_diff(col, y, h),
                           second_diff(row, x, w),
                           second_diff(col, y, h)};
      const Eigen::Index r = static_cast<Eigen::Index>(y) * w + x;
      for (int c = 0; c < kChannels; ++c) stack.values(r, c) = catalog.channels[c].second(p);
    }
  }
  return stack;
}

SpdMatrix covariance_descriptor(const FeatureStack& stack, const InkMask& mask, const Rect& region,
                                int min_pixels) {
  if (mask.width != stack.width || mask.height != stack.height)
    throw Error(Errc::kDimensionMismatch, "mask and feature stack sizes differ");
  const Rect r{std::max(0, region.x0), std::max(0, region.y0), std::min(stack.width, region.x1),
               std::min(stack.height, region.y1)};
  std::vector<Eigen::Index> rows;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x)
      if (mask.at(x, y)) rows.push_back(static_cast<Eigen::Index>(y) * stack.width + x);
  const int n = static_cast<int>(rows.size());
  if (n < std::max(min_pixels, 2)) {
    std::ostringstream os;
    os << n << " ink pixels in region, " << std::max(min_pixels, 2) << " required";
    throw Error(Errc::kTooFewInkPixels, os.str());
  }
  const int d = static_cast<int>(stack.values.cols());
  Matrix samples(n, d);
  for (int k = 0; k < n; ++k) samples.row(k) = stack.values.row(rows[k]);
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  samples.rowwise() -= mean;
  Matrix c = (samples.transpose() * samples) / static_cast<double>(n - 1);
  c.diagonal().array() += kShrinkEps * (c.trace() / d + kShrinkDelta);
  return validate_spd(0.5 * (c + c.transpose()));
}

std::vector<int> quantile_cuts(const std::vector<double>& mass, int parts) {
  const int n = static_cast<int>(mass.size());
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + mass[i];
  const double total = cum[n];
  std::vector<int> cuts{0};
  for (int k = 1; k < parts; ++k) {
    const int prev = cuts.back();
    const int lo = std::min(prev + 1, n);
    const int hi = std::max(lo, n - (parts - k));
    const double target = total * k / parts;
    int best = lo;
    for (int c = lo + 1; c <= std::min(hi, n); ++c)
      if (std::abs(cum[c] - target) < std::abs(cum[best] - target)) best = c;
    cuts.push_back(best);
  }
  cuts.push_back(n);
  return cuts;
}

std::array<Rect, kPyramidRegions> equimass_pyramid(const InkMask& mask) {
  if (mask.width <= 0 || mask.height <= 0 || mask.count() == 0)
    throw Error(Errc::kBlankImage, "equimass pyramid needs a nonempty ink mask");
  std::vector<double> cols(mask.width, 0.0), rows(mask.height, 0.0);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        cols[x] += 1.0;
        rows[y] += 1.0;
      }
  std::array<Rect, kPyramidRegions> out;
  out[0] = {0, 0, mask.width, mask.height};
  int g = 1;
  for (int parts : {2, 3}) {
    const std::vector<int> cx = quantile_cuts(cols, parts), cy = quantile_cuts(rows, parts);
    for (int i = 0; i < parts; ++i)
      for (int j = 0; j < parts; ++j) out[g++] = {cx[j], cy[i], cx[j + 1], cy[i + 1]};
  }
  return out;
}

PyramidDescriptors image_to_pyramid(const GrayImage& image, int min_pixels) {
  const Preprocessed pre = preprocess(image);
  const FeatureStack stack = feature_channels(pre.image);
  const std::array<Rect, kPyramidRegions> regions = equimass_pyramid(pre.mask);
  PyramidDescriptors out;
  const SpdMatrix whole = covariance_descriptor(stack, pre.mask, regions[0], min_pixels);
  out.regions.push_back(whole);
  out.masks.push_back(regions[0]);
  out.fallback.push_back(false);
  for (int g = 1; g < kPyramidRegions; ++g) {
    out.masks.push_back(regions[g]);
    try {
      out.regions.push_back(covariance_descriptor(stack, pre.mask, regions[g], min_pixels));
      out.fallback.push_back(false);
    } catch (const Error& e) {
      if (e.code() != Errc::kTooFewInkPixels) throw;
      out.regions.push_back(whole);
      out.fallback.push_back(true);
    }
  }
  return out;
}

void write_pyramid_jsonl(const std::string& image_id, const PyramidDescriptors& pyramid, std::ostream& out) {
  for (std::size_t g = 0; g < pyramid.regions.size(); ++g) {
    const SpdMatrix& m = pyramid.regions[g];
    nlohmann::json matrix = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
      matrix.push_back(std::move(row));
    }
    nlohmann::json rec{{"image_id", image_id},
                       {"g", g + 1},
                       {"fallback", g < pyramid.fallback.size() && pyramid.fallback[g]},
                       {"matrix", std::move(matrix)}};
    out << rec.dump() << '\n';
  }
}

}  // namespace geoforge
