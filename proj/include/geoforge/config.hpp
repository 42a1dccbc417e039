// include/geoforge/config.hpp

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

// INI run configuration. Sections: [run] [source] [protocol] [model]
// [synth] [metric] [zeta] [mh]. Unknown sections or keys are rejected.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geoforge/protocol.hpp"

namespace geoforge {

struct ZetaSpec {
  double sigma_min = 0.01;
  double sigma_max = 5.0;
  int nodes = 64;
  long long samples = 1000000;
  std::uint64_t seed = 7;
  std::string cache;  // empty: default location
};

struct RunConfig {
  ExperimentConfig experiment;
  std::string source = "synthetic";          // "synthetic" or "directory"
  std::vector<std::string> datasets;         // directory mode: one (intra) or two (cross)
  SyntheticSourceConfig synthetic;
  ZetaSpec zeta;
  std::string output = "geoforge_out";
};

/// Throws kConfig with the offending key on any parse or range failure.
RunConfig parse_run_config(const std::string& ini_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every key with its resolved value, in a fixed order; parses back to the
/// same configuration.
std::string to_ini(const RunConfig& config);

}  // namespace geoforge
