// include/geoforge/roc.hpp

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

// Verification error rates. Scores are distances: genuine (positive) scores
// are expected low, impostor (negative) scores high.

#include <span>

namespace geoforge {

struct EerResult {
  double eer_percent = 0.0;
  double threshold = 0.0;
};

/// Equal error rate. With the acceptance rule "score <= t", FRR(t) is the
/// fraction of positives above t and FAR(t) the fraction of negatives at or
/// below t. Both are evaluated at every pooled score (plus t = -inf); the EER
/// is read off where FAR - FRR changes sign, interpolating linearly between
/// the bracketing thresholds. Throws kEmptyClass if either list is empty.
EerResult eer(std::span<const double> pos, std::span<const double> neg);

/// P(neg > pos) + P(neg == pos)/2, the probability that a random impostor is
/// ranked above a random genuine pair.
double auc(std::span<const double> pos, std::span<const double> neg);

}  // namespace geoforge
