// include/geoforge/io.hpp

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

// JSON and CSV forms of fitted models, metrics and experiment reports.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "geoforge/metric.hpp"
#include "geoforge/protocol.hpp"
#include "geoforge/rgmm.hpp"

namespace geoforge {

inline constexpr int kReportVersion = 1;
inline constexpr int kModelVersion = 1;
inline constexpr const char* kSyntheticSourceFlag = "SYNTHETIC-SOURCE";

nlohmann::json matrix_to_json(const Matrix& m);
/// Square or rectangular nested arrays; throws kFormat on ragged input.
Matrix matrix_from_json(const nlohmann::json& j);

/// {"kind": "rgmm", "version", "dim", "components": [{weight, sigma, center}]}
nlohmann::json rgmm_to_json(const RgmmModel& model);
RgmmModel rgmm_from_json(const nlohmann::json& j);

/// {"kind": "metric", "version", "d", "m", "q", "W", "alpha_beta", "sigma", "threshold"}
nlohmann::json metric_to_json(const MetricModel& model);
MetricModel metric_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const ExperimentReport& report);

/// protocol,fold,writer,g,repetition,eer_percent; fold is the global fold id
/// listed in report.json.
void write_eer_curve_csv(const ExperimentReport& report, std::ostream& out);
/// protocol,g,K,a,eer_percent
void write_averaged_csv(const ExperimentReport& report, std::ostream& out);

/// Reads and parses a JSON file; kIo when unreadable, kFormat when malformed
/// or empty.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Fixed-format decimal used in every CSV output.
std::string format_number(double v);

}  // namespace geoforge
