// include/geoforge/app.hpp

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

#include <filesystem>
#include <iosfwd>

#include "geoforge/config.hpp"
#include "geoforge/error.hpp"
#include "geoforge/rgd.hpp"

namespace geoforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr const char* kToolVersion = "1.0.0";

/// 2 for configuration errors, 3 for data errors, 4 for numeric failures.
int exit_code(Errc code);

/// GEOFORGE_CACHE if set, else the configured path, else
/// $XDG_CACHE_HOME/geoforge or ~/.cache/geoforge.
std::filesystem::path zeta_cache_dir(const std::string& configured);

/// Loads the cached table matching (dim, spec) or builds and stores it.
ZetaTable cached_zeta_table(int dim, const ZetaSpec& spec, int jobs, std::ostream& err);

/// Entry point of the `geoforge` binary: subcommands zeta, run, inspect,
/// descriptors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geoforge
