// include/geoforge/error.hpp

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

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoforge {

enum class Errc {
  kNotSymmetric,
  kNotPositiveDefinite,
  kConvergenceFailure,
  kEntryOverflow,
  kDimensionMismatch,
  kNotOrthonormal,
  kNoConvergence,
  kSigmaOutOfTableRange,
  kNonMonotonePhi,
  kOutOfRange,
  kTooFewPoints,
  kEmptyComponent,
  kRequestedMoreThanAvailable,
  kEmptySimilarClass,
  kNonPositiveAlphaBeta,
  kEmptyClass,
  kDegenerateScores,
  kBlankImage,
  kTooFewInkPixels,
  kTooFewWriters,
  kInsufficientGenuine,
  kInvalidArgument,
  kFormat,
  kIo,
  kConfig,
};

std::string_view errc_name(Errc code);

/// Exception carrying a machine-readable error kind. Every failure raised by
/// the library is an Error; the CLI maps kinds to exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// Message without the kind prefix, for re-throwing with added context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

/// Raised by mle_sigma when the target lies outside the tabulated phi range.
class SigmaRangeError : public Error {
 public:
  SigmaRangeError(const std::string& what, double clamped)
      : Error(Errc::kOutOfRange, what), clamped_(clamped) {}

  /// Endpoint of the table the request was clamped to.
  double clamped() const noexcept { return clamped_; }

 private:
  double clamped_;
};

}  // namespace geoforge
