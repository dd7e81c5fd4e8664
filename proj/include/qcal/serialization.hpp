// Copyright 2026 The qcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcal/config.hpp"
#include "qcal/ensemble.hpp"
#include "qcal/trajectory.hpp"

namespace qcal {

/// Version of both trajectory file layouts.
inline constexpr std::uint32_t kTrajectoryFormatVersion = 1;

/// Sets above this many trajectories default to the binary layout.
inline constexpr std::size_t kBinaryThreshold = 10000;

// Line-delimited JSON: a header record, then one record per trajectory.
void write_jsonl(std::ostream& out, const TrajectorySet& set);
TrajectorySet read_jsonl(std::istream& in);

// Columnar binary: magic "QCALTRJ\0", version, header, then one contiguous
// column per field. Little-endian.
void write_binary(std::ostream& out, const TrajectorySet& set);
TrajectorySet read_binary(std::istream& in);

/// One summary row per trajectory (labels, jump count, W, Q, J, sigma).
void write_csv(std::ostream& out, const TrajectorySet& set,
               const SimConfig& config, const MeasurementModel& mm);

/// Concrete format for a set of n trajectories.
OutputFormat resolve_format(OutputFormat requested, std::size_t n);

std::string file_extension(OutputFormat format);

/// Writes `set` to dir/stem.<ext> and returns the path. Throws IoError.
std::filesystem::path write_trajectory_file(const std::filesystem::path& dir,
                                            const std::string& stem,
                                            const TrajectorySet& set,
                                            OutputFormat format,
                                            const SimConfig& config,
                                            const MeasurementModel& mm);

/// Reads a JSONL or binary trajectory file, detected by content.
TrajectorySet read_trajectory_file(const std::filesystem::path& path);

struct ManifestFile {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes{};
};

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::string artifact_version{QCAL_VERSION};
  std::uint64_t base_seed{};
  std::uint64_t n{};
  std::uint64_t failed{};
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> warnings;
  std::vector<ManifestFile> files;
};

/// UTC time as ISO 8601.
std::string utc_timestamp();

/// Checksums `path` and appends it to the manifest under its file name.
void add_file(RunManifest& manifest, const std::filesystem::path& path);

std::string manifest_json(const RunManifest& manifest);
void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest);

std::string fr_report_json(const FrEstimate& estimate, std::uint64_t seed);
/// Header plus one row.
std::string fr_report_csv(const FrEstimate& estimate, std::uint64_t seed);

}  // namespace qcal
