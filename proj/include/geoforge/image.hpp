// include/geoforge/image.hpp

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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace geoforge {

/// Grayscale raster, row-major, intensities in [0, 1] (0 = black).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 1.0);

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Throws kInvalidArgument unless the image is nonempty, sized consistently
/// and every intensity lies in [0, 1].
void check_image(const GrayImage& image);

/// Binary PGM (P5) with maxval < 256, or ASCII PGM (P2). Comments allowed.
GrayImage read_pgm(std::istream& in);
GrayImage read_image(const std::filesystem::path& path);
/// Writes P5 with maxval 255, rounding intensities.
void write_pgm(const GrayImage& image, std::ostream& out);

}  // namespace geoforge
