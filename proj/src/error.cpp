// src/error.cpp

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

#include "geoforge/error.hpp"

namespace geoforge {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kNotSymmetric: return "NotSymmetric";
    case Errc::kNotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::kConvergenceFailure: return "ConvergenceFailure";
    case Errc::kEntryOverflow: return "EntryOverflow";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kNotOrthonormal: return "NotOrthonormal";
    case Errc::kNoConvergence: return "NoConvergence";
    case Errc::kSigmaOutOfTableRange: return "SigmaOutOfTableRange";
    case Errc::kNonMonotonePhi: return "NonMonotonePhi";
    case Errc::kOutOfRange: return "OutOfRange";
    case Errc::kTooFewPoints: return "TooFewPoints";
    case Errc::kEmptyComponent: return "EmptyComponent";
    case Errc::kRequestedMoreThanAvailable: return "RequestedMoreThanAvailable";
    case Errc::kEmptySimilarClass: return "EmptySimilarClass";
    case Errc::kNonPositiveAlphaBeta: return "NonPositiveAlphaBeta";
    case Errc::kEmptyClass: return "EmptyClass";
    case Errc::kDegenerateScores: return "DegenerateScores";
    case Errc::kBlankImage: return "BlankImage";
    case Errc::kTooFewInkPixels: return "TooFewInkPixels";
    case Errc::kTooFewWriters: return "TooFewWriters";
    case Errc::kInsufficientGenuine: return "InsufficientGenuine";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kFormat: return "Format";
    case Errc::kIo: return "Io";
    case Errc::kConfig: return "Config";
  }
  return "Unknown";
}

}  // namespace geoforge
