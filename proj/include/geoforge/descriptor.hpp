// include/geoforge/descriptor.hpp

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

// Image to SPD front end: Otsu binarization and cropping, a ten-channel
// feature stack, shrunk region covariances and the fourteen-region
// equimass pyramid.

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "geoforge/image.hpp"
#include "geoforge/spd.hpp"

namespace geoforge {

inline constexpr int kChannels = 10;
inline constexpr int kPyramidRegions = 14;
inline constexpr int kCropMargin = 2;
inline constexpr double kShrinkEps = 1e-4;
inline constexpr double kShrinkDelta = 1e-8;
inline constexpr int kMinRegionPixels = 30;

struct InkMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> ink;

  bool at(int x, int y) const { return ink[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool operator==(const Rect&) const = default;
};

/// Otsu threshold bin on a 256-bin histogram: pixels whose bin is <= the
/// returned value are ink. Returns -1 when the image holds a single level.
int otsu_bin(const GrayImage& image);
int intensity_bin(double v);

struct Preprocessed {
  GrayImage image;  // cropped, inverted (ink near 1)
  InkMask mask;     // same size as image
  Rect crop;        // crop window in source coordinates
  int threshold_bin = 0;
};

/// Otsu ink mask (dark = ink), crop to the ink bounding box grown by a
/// two-pixel margin, invert intensities. Throws kBlankImage without ink.
Preprocessed preprocess(const GrayImage& image);

/// Pixel-major feature matrix: row y*width + x holds the channel values.
struct FeatureStack {
  int width = 0;
  int height = 0;
  std::string catalog;
  std::vector<std::string> names;
  Matrix values;  // (width*height) x kChannels
};

/// Local image derivatives handed to channel functions.
struct PixelContext {
  double x_norm, y_norm, intensity;
  double ix, iy, ixx, iyy;
};

struct ChannelCatalog {
  std::string name;
  std::vector<std::pair<std::string, std::function<double(const PixelContext&)>>> channels;
};

/// x̃, ỹ, I, |Ix|, |Iy|, |Ixx|, |Iyy|, gradient magnitude,
/// atan(|Iy|/(|Ix|+1e-6)), Laplacian.
const ChannelCatalog& standard_catalog();

/// Central differences in the interior; one-sided first differences on the
/// border, second differences copied from the nearest interior pixel.
FeatureStack feature_channels(const GrayImage& image, const ChannelCatalog& catalog = standard_catalog());

/// Unbiased covariance of the channel vectors over ink pixels of `mask`
/// inside `region`, shrunk by C + ε(tr C / 10 + δ) I.
/// Throws kTooFewInkPixels when fewer than `min_pixels` qualify.
SpdMatrix covariance_descriptor(const FeatureStack& stack, const InkMask& mask, const Rect& region,
                                int min_pixels = kMinRegionPixels);

/// Cut positions splitting [0, mass.size()) into `parts` bands at the
/// cumulative-mass quantiles k/parts; each band keeps at least one pixel
/// when the axis is long enough.
std::vector<int> quantile_cuts(const std::vector<double>& mass, int parts);

/// g = 1 full crop, g = 2..5 the 2x2 cells, g = 6..14 the 3x3 cells, each
/// level row-major. Cuts come from the ink column and row marginals.
std::array<Rect, kPyramidRegions> equimass_pyramid(const InkMask& mask);

struct PyramidDescriptors {
  std::vector<SpdMatrix> regions;  // kPyramidRegions entries, index g-1
  std::vector<Rect> masks;         // empty for simulated pyramids
  std::vector<bool> fallback;      // region replaced by the whole-image descriptor
};

PyramidDescriptors image_to_pyramid(const GrayImage& image, int min_pixels = kMinRegionPixels);

/// Writes one JSON object per region: {image_id, g, fallback, matrix}.
void write_pyramid_jsonl(const std::string& image_id, const PyramidDescriptors& pyramid, std::ostream& out);

}  // namespace geoforge
