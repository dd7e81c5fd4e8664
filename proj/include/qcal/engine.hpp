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
#include <random>

#include "qcal/config.hpp"
#include "qcal/physics_model.hpp"
#include "qcal/trajectory.hpp"

namespace qcal {

/// Per-trajectory random engine. std::mt19937_64's output sequence is fixed
/// by the standard, so trajectories are reproducible across platforms.
using Rng = std::mt19937_64;

/// Uniform draw on the open interval (0, 1) from 53 random bits.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Seed of trajectory `index` in an ensemble with `base_seed`, independent of
/// scheduling (SplitMix64 finalizer over the pair).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Normalized a_t phi (x = +1) or a_t* phi (x = -1). Throws std::logic_error
/// for a zero-amplitude jump, which has zero rate and is never sampled.
Vector2cd apply_jump(const Vector2cd& state, const EigenFrame& frame, int x);

/// Samples one trajectory: preparation from P_i, jump times by survival
/// inversion of the unnormalized no-jump state, Ito-convention jump
/// directions, temperature updates, optional phonon drift and a Born-rule
/// final measurement.
Trajectory sample_trajectory(const SimConfig& config, std::uint64_t seed);

/// Same algorithm for the time-reversed process (generator G^R, rates at the
/// mirrored time, preparation from the reversed preparation law). Phonon drift
/// is not applied to the reversed process.
Trajectory sample_reversed_trajectory(const SimConfig& config,
                                      std::uint64_t seed);

Trajectory sample_trajectory(const SimConfig& config, std::uint64_t seed,
                             Direction direction);

struct WindowJump {
  double time{};
  int x{};
  double gap{};
  double temperature{};
};

/// First jump in [t, t_end] from a normalized state at temperature T, or
/// nullopt if the state survives the window.
std::optional<WindowJump> sample_first_jump(const SimConfig& config,
                                            Direction direction, double t,
                                            double t_end,
                                            const Vector2cd& state, double T,
                                            Rng& rng);

/// Advances the calorimeter temperature through the phonon drift
/// d(T^2)/dt = kappa sigma_ep (T_p^n - T^n) over a duration dt.
double evolve_temperature_drift(double T, double dt, const PhononParams& phonon,
                                const PhysicalParams& params,
                                double rel_tol = 1e-10);

struct EnsembleOptions {
  int workers{1};
  bool fail_fast{false};
  Direction direction{Direction::forward};
};

/// n independent trajectories with seeds derive_seed(base_seed, index).
/// The result is bit-identical for any worker count. Failed trajectories are
/// reported in TrajectorySet::failures unless fail_fast rethrows the first.
TrajectorySet run_ensemble(const SimConfig& config, std::uint64_t n,
                           std::uint64_t base_seed,
                           const EnsembleOptions& options = {});

}  // namespace qcal
