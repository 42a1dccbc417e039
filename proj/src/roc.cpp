// src/roc.cpp

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

#include "geoforge/roc.hpp"

#include <algorithm>
#include <vector>

#include "geoforge/error.hpp"

namespace geoforge {
namespace {

void require_nonempty(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty())
    throw Error(Errc::kEmptyClass, "both genuine and impostor scores are required");
}

}  // namespace

EerResult eer(std::span<const double> pos, std::span<const double> neg) {
  require_nonempty(pos, neg);
  std::vector<double> p(pos.begin(), pos.end()), n(neg.begin(), neg.end());
  std::sort(p.begin(), p.end());
  std::sort(n.begin(), n.end());
  std::vector<double> thresholds;
  thresholds.reserve(p.size() + n.size());
  std::merge(p.begin(), p.end(), n.begin(), n.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double np = static_cast<double>(p.size()), nn = static_cast<double>(n.size());
  double prev_frr = 1.0, prev_far = 0.0, prev_t = thresholds.front();
  std::size_t ip = 0, in = 0;
  for (double t : thresholds) {
    while (ip < p.size() && p[ip] <= t) ++ip;
    while (in < n.size() && n[in] <= t) ++in;
    const double frr = (np - static_cast<double>(ip)) / np;
    const double far = static_cast<double>(in) / nn;
    if (far >= frr) {
      const double before = prev_far - prev_frr;  // < 0
      const double after = far - frr;             // >= 0
      const double s = -before / (after - before);
      return {100.0 * (prev_frr + s * (frr - prev_frr)), prev_t + s * (t - prev_t)};
    }
    prev_frr = frr;
    prev_far = far;
    prev_t = t;
  }
  // FAR reaches 1 and FRR reaches 0 at the largest score, so the loop returns.
  return {0.0, thresholds.back()};
}

double auc(std::span<const double> pos, std::span<const double> neg) {
  require_nonempty(pos, neg);
  std::vector<double> p(pos.begin(), pos.end());
  std::sort(p.begin(), p.end());
  double wins = 0.0;
  for (double s : neg) {
    const auto lo = std::lower_bound(p.begin(), p.end(), s);
    const auto hi = std::upper_bound(lo, p.end(), s);
    wins += static_cast<double>(lo - p.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(p.size()) * static_cast<double>(neg.size()));
}

}  // namespace geoforge
