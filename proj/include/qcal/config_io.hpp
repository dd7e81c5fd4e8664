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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qcal/config.hpp"

namespace qcal {

struct ParsedConfig {
  SimConfig config;
  std::vector<std::string> warnings;
};

/// Parses and validates a YAML configuration. Missing sections take their
/// defaults; unknown keys are rejected. Throws ConfigError (with line and
/// column) on malformed input and ValidationError on violated invariants.
///
/// Distributions are written as {up: p, down: q} or one of the shorthands
/// uniform, up, down, thermal (Gibbs law at T0 and the bare gap).
///
/// With `units: si` the physics block takes omega0 [rad/s], gamma [1/s],
/// T0 [K] and an optional calorimeter (fermi_energy [eV], electrons); drive
/// times are in s, drive amplitudes in rad/s, T_p in K and sigma_ep in
/// W/K^n. Values are converted once to natural units (energy hbar omega0,
/// time 1/omega0) and the parsed config holds only natural units.
ParsedConfig parse_config(std::string_view text);

/// Reads and parses a configuration file. Throws IoError when unreadable.
ParsedConfig load_config(const std::filesystem::path& path);

/// YAML text that parses back to an equal configuration.
std::string serialize_config(const SimConfig& config);

/// Canonical JSON of everything that affects sampled trajectories (physics,
/// drive, measurement, numerics). Keys are sorted, so the result does not
/// depend on how the source text was ordered. Ensemble settings are left out.
std::string canonical_json(const SimConfig& config);

/// Hex SHA-256 of canonical_json.
std::string config_digest(const SimConfig& config);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

std::string to_string(OutputFormat format);
OutputFormat parse_output_format(std::string_view name);

}  // namespace qcal
