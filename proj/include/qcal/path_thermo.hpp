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

#include <cstddef>
#include <vector>

#include "qcal/config.hpp"
#include "qcal/dormand_prince.hpp"
#include "qcal/physics_model.hpp"
#include "qcal/trajectory.hpp"

namespace qcal {

/// Heat exchanged at one jump and its entropy bookkeeping.
struct HeatRecord {
  double time{};
  /// Q_k = omega_{t_k} x_k, heat emitted by the qubit into the calorimeter.
  double heat{};
  /// 1/T_{k-1} for emissions, 1/T_k for absorptions.
  double beta{};
  /// S_eq(t_k, T_k) - S_eq(t_k, T_{k-1}).
  double delta_s_eq{};
};

struct PathThermo {
  double J{};
  double sigma{};
  double S_i{};
  double S_f{};
  double Q_total{};
  double W{};
  double E_i{};
  double E_f{};
  std::vector<HeatRecord> heat;
};

/// Entropy flux J = sum_k [ln gamma^{x_k}_{t_k}(T_{k-1}) - ln gamma^{-x_k}_{t_k}(T_k)],
/// the log-density ratio of a path and its time reversal.
double entropy_flux(const Trajectory& traj, const PhysicalParams& params,
                    const DriveProtocol& drive);

/// Per-jump (Q_k, beta_k, Delta S_eq,k); their sum Delta S_eq,k + beta_k Q_k
/// reproduces entropy_flux term by term.
std::vector<HeatRecord> heat_decomposition(const Trajectory& traj,
                                           const PhysicalParams& params,
                                           const DriveProtocol& drive);

/// sigma = S_f - S_i + J with S = -ln P. Throws InfiniteEntropy when the
/// observed initial or final label has zero reference probability.
double entropy_production(const Trajectory& traj, const MeasurementModel& mm,
                          const PhysicalParams& params,
                          const DriveProtocol& drive);

/// Whether E_f is <phi_f|H_2|phi_f> on the pre-measurement state or the
/// eigenvalue of the observed final label.
enum class EnergyAccounting { pre_measurement, post_measurement };

struct WorkAndEnergy {
  double W{};
  double E_i{};
  double E_f{};
  double Q_total{};
};

/// W from the integrator-accumulated work along no-jump segments,
/// Q_total = sum_k omega_{t_k} x_k, endpoint energies of H_2.
WorkAndEnergy work_and_energy(
    const Trajectory& traj, const PhysicalParams& params,
    const DriveProtocol& drive,
    EnergyAccounting accounting = EnergyAccounting::pre_measurement);

/// Recomputes W independently: every no-jump segment is re-propagated from
/// its known start state (preparation or post-jump eigenstate) and the work
/// rate is integrated alongside. Requires a forward trajectory without phonon
/// drift.
double work_by_reintegration(const Trajectory& traj,
                             const PhysicalParams& params,
                             const DriveProtocol& drive,
                             const Tolerances& tol = {});

PathThermo path_thermo(
    const Trajectory& traj, const MeasurementModel& mm,
    const PhysicalParams& params, const DriveProtocol& drive,
    EnergyAccounting accounting = EnergyAccounting::pre_measurement);

struct FirstLawResidual {
  /// |<E_f - E_i> - <W> + <Q_total>|
  double residual{};
  double std_error{};
  double mean_delta_e{};
  double mean_work{};
  double mean_heat{};
  std::size_t n{};
};

FirstLawResidual first_law_residual(
    const TrajectorySet& set, const PhysicalParams& params,
    const DriveProtocol& drive,
    EnergyAccounting accounting = EnergyAccounting::pre_measurement);

}  // namespace qcal
