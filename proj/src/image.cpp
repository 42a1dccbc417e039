// src/image.cpp

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

#include "geoforge/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

int header_int(std::istream& in, const char* what) {
  const std::string token = header_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size() || v <= 0) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::kFormat, std::string("PGM header: bad ") + what + " '" + token + "'");
  }
}

}  // namespace

GrayImage::GrayImage(int w, int h, double fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {}

void check_image(const GrayImage& image) {
  if (image.width <= 0 || image.height <= 0)
    throw Error(Errc::kInvalidArgument, "image is empty");
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
    throw Error(Errc::kInvalidArgument, "pixel buffer does not match image size");
  for (double v : image.pixels)
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::kInvalidArgument, "intensity outside [0, 1]");
}

GrayImage read_pgm(std::istream& in) {
  const std::string magic = header_token(in);
  if (magic != "P5" && magic != "P2") throw Error(Errc::kFormat, "not a PGM file (magic '" + magic + "')");
  const int w = header_int(in, "width");
  const int h = header_int(in, "height");
  const int maxval = header_int(in, "maxval");
  if (maxval > 255) throw Error(Errc::kFormat, "only 8-bit PGM is supported");
  GrayImage image(w, h);
  const std::size_t n = image.pixels.size();
  if (magic == "P5") {
    std::string raw(n, '\0');
    if (!in.read(raw.data(), static_cast<std::streamsize>(n)))
      throw Error(Errc::kFormat, "PGM pixel data truncated");
    for (std::size_t i = 0; i < n; ++i)
      image.pixels[i] = std::min(1.0, static_cast<unsigned char>(raw[i]) / static_cast<double>(maxval));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      int v = -1;
      if (!(in >> v) || v < 0 || v > maxval) throw Error(Errc::kFormat, "PGM pixel data malformed");
      image.pixels[i] = v / static_cast<double>(maxval);
    }
  }
  return image;
}

GrayImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  const std::string ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG")
    throw Error(Errc::kFormat, "PNG input is not supported, convert to PGM: " + path.string());
  try {
    return read_pgm(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_pgm(const GrayImage& image, std::ostream& out) {
  check_image(image);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::string raw(image.pixels.size(), '\0');
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = static_cast<char>(static_cast<unsigned char>(std::lround(image.pixels[i] * 255.0)));
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

}  // namespace geoforge
