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
#include <optional>
#include <string>
#include <vector>

#include "qcal/physics_model.hpp"
#include "qcal/types.hpp"

namespace qcal {

/// Probability law on the two measurement outcomes.
struct Distribution {
  double up{0.5};
  double down{0.5};

  static Distribution uniform() { return {0.5, 0.5}; }
  static Distribution certain(Level level) {
    return level == Level::up ? Distribution{1.0, 0.0}
                              : Distribution{0.0, 1.0};
  }
  double of(Level level) const { return level == Level::up ? up : down; }

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Where the final-measurement reference law P_f comes from. `automatic`
/// resolves to `oracle` when kappa = 0 and to `empirical` otherwise.
enum class FinalSource { automatic, configured, empirical, oracle };

/// Preparation law P_i and final-measurement reference law P_f. Boundary
/// entropies are S_i = -ln P_i(initial), S_f = -ln P_f(final).
struct MeasurementModel {
  Distribution initial;
  Distribution final;
  FinalSource final_source{FinalSource::automatic};

  friend bool operator==(const MeasurementModel&,
                         const MeasurementModel&) = default;
};

/// Deterministic electron-phonon heat exchange of the calorimeter,
/// d(T^2)/dt = kappa sigma_ep (T_p^n - T^n) between jumps.
struct PhononParams {
  bool enabled{false};
  double sigma_ep{0};
  double T_p{1};
  int exponent{5};

  friend bool operator==(const PhononParams&, const PhononParams&) = default;
};

struct NumericalSettings {
  double rel_tol{1e-10};
  double abs_tol{1e-12};
  /// Jump-time resolution as a fraction of the horizon.
  double jump_time_tol{1e-12};
  /// Number of equally spaced observation times t_i + k (t_f - t_i) / n,
  /// k = 1..n, at which trajectories record their state.
  int checkpoints{0};

  friend bool operator==(const NumericalSettings&,
                         const NumericalSettings&) = default;
};

enum class OutputFormat { automatic, text, binary, csv };

struct EnsembleSettings {
  std::uint64_t n{1000};
  std::uint64_t seed{1};
  int workers{1};
  OutputFormat format{OutputFormat::automatic};
  std::string out_dir{"."};
  /// Trajectories in the first pass of the two-pass empirical P_f estimate.
  std::uint64_t marginal_pass_n{20000};
  bool fail_fast{false};

  friend bool operator==(const EnsembleSettings&,
                         const EnsembleSettings&) = default;
};

/// Complete description of a simulation run. The horizon is the drive's.
struct SimConfig {
  PhysicalParams physics;
  DriveProtocol drive{DriveProtocol::undriven(0.0, 1.0)};
  MeasurementModel measurement;
  /// Preparation law of the reversed process; defaults to P_f.
  std::optional<Distribution> reversed_preparation;
  PhononParams phonon;
  NumericalSettings numerics;
  EnsembleSettings ensemble;

  Distribution reversed_initial() const {
    return reversed_preparation.value_or(measurement.final);
  }
  double t_i() const { return drive.t_i(); }
  double t_f() const { return drive.t_f(); }

  friend bool operator==(const SimConfig& a, const SimConfig& b) {
    return a.physics.omega0 == b.physics.omega0 &&
           a.physics.gamma == b.physics.gamma &&
           a.physics.kappa == b.physics.kappa && a.physics.T0 == b.physics.T0 &&
           a.physics.emission_only == b.physics.emission_only &&
           a.drive == b.drive && a.measurement == b.measurement &&
           a.reversed_preparation == b.reversed_preparation &&
           a.phonon == b.phonon && a.numerics == b.numerics &&
           a.ensemble == b.ensemble;
  }
};

/// Checks every invariant; throws ValidationError naming the first violation.
/// Returns non-fatal warnings (e.g. Sommerfeld-validity).
std::vector<std::string> validate(const SimConfig& config);

/// Squared-temperature step kappa omega0 relative to T0^2 above which the
/// leading-order Sommerfeld relation is flagged.
inline constexpr double kSommerfeldWarningRatio = 0.01;

}  // namespace qcal
