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
#include <string>
#include <vector>

#include "qcal/types.hpp"

namespace qcal {

/// One temperature jump. x = +1 is an emission by the qubit (calorimeter heats
/// up, operator a_t), x = -1 an absorption (operator a_t*).
struct JumpRecord {
  double time{};
  int x{};
  double gap{};
  double temp_before{};
  double temp_after{};
  /// gamma^x at temp_before (Ito convention).
  double rate{};

  friend bool operator==(const JumpRecord&, const JumpRecord&) = default;
};

/// Deterministic stretch between jumps, with the work done on the qubit.
struct Segment {
  double t_start{};
  double t_end{};
  double work{};

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Normalized state and temperature at an observation time.
struct Checkpoint {
  double time{};
  Vector2cd state{Vector2cd::Zero()};
  double temperature{};

  friend bool operator==(const Checkpoint& a, const Checkpoint& b) {
    return a.time == b.time && a.state == b.state &&
           a.temperature == b.temperature;
  }
};

struct Trajectory {
  Level initial_label{Level::down};
  std::vector<JumpRecord> jumps;
  std::vector<Segment> segments;
  std::vector<Checkpoint> checkpoints;
  /// Normalized state at t_f before the final measurement.
  Vector2cd final_state{Vector2cd::Zero()};
  Level final_label{Level::down};
  double final_temperature{};
  std::uint64_t seed{};
  Direction direction{Direction::forward};

  double total_work() const {
    double w = 0;
    for (const Segment& s : segments) w += s.work;
    return w;
  }

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.initial_label == b.initial_label && a.jumps == b.jumps &&
           a.segments == b.segments && a.checkpoints == b.checkpoints &&
           a.final_state == b.final_state && a.final_label == b.final_label &&
           a.final_temperature == b.final_temperature && a.seed == b.seed &&
           a.direction == b.direction;
  }
};

/// A trajectory that could not be completed.
struct TrajectoryFailure {
  std::uint64_t index{};
  std::uint64_t seed{};
  std::string kind;
  std::string message;

  friend bool operator==(const TrajectoryFailure&,
                         const TrajectoryFailure&) = default;
};

/// Ensemble of trajectories sampled from one configuration.
struct TrajectorySet {
  std::string config_digest;
  Direction direction{Direction::forward};
  std::uint64_t base_seed{};
  std::vector<Trajectory> trajectories;
  std::vector<TrajectoryFailure> failures;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;
};

}  // namespace qcal
