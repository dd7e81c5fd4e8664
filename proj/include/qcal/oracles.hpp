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
#include <span>
#include <vector>

#include "qcal/config.hpp"
#include "qcal/dormand_prince.hpp"
#include "qcal/types.hpp"

namespace qcal {

// ---------------------------------------------------------------------------
// Discrete-time path enumeration.
//
// With dt = (t_f - t_i) / n_steps, each step at t_j = t_i + j dt applies one of
//   no jump:     I - i G_{t_j}(T) dt
//   emission:    sqrt(gamma^+_{t_j}(T) dt) a_{t_j}
//   absorption:  sqrt(gamma^-_{t_j}(T) dt) a_{t_j}*
// with rates at the pre-step temperature. Summed over outcomes the step is
// trace preserving up to <G^dag G> dt^2.

inline constexpr int kMaxEnumerationSteps = 14;
/// Largest n_steps for which enumerate_paths materializes every path.
inline constexpr int kMaxListedSteps = 12;

/// How the reversed process is discretized for the per-path comparison.
enum class ReversedKernel {
  /// Per-step reversed matrix is exactly the adjoint of the forward step;
  /// the fluctuation relation then holds pathwise at finite dt.
  exact_adjoint,
  /// G^R discretized on its own left-point grid; deviations are O(dt).
  independent,
};

struct DiscretePath {
  Level initial{Level::down};
  Level final{Level::down};
  /// One entry per step: 0 no jump, +1 emission, -1 absorption.
  std::vector<std::int8_t> steps;
  /// Joint probability P_i(initial) P(path, final | initial).
  double probability{};
  double J{};
  double sigma{};

  int jump_count() const;
};

/// Every (preparation, outcome sequence, final label) with its probability,
/// J and sigma. sigma uses `final_reference` or, when absent, the exact final
/// marginal of the enumeration. Throws CombinatorialLimit above
/// kMaxListedSteps.
std::vector<DiscretePath> enumerate_paths(
    const SimConfig& config, int n_steps,
    std::optional<Distribution> final_reference = std::nullopt);

struct EnumerationSummary {
  int n_steps{};
  double dt{};
  std::uint64_t path_count{};
  double total_probability{};
  /// Sum over paths of P e^{-sigma}.
  double mean_exp_neg_sigma{};
  double mean_sigma{};
  /// max |P_fwd / (P_rev e^J) - 1| over paths with nonzero probability.
  double max_fr_deviation{};
  /// P(number of jumps = k), k = 0..n_steps.
  std::vector<double> jump_count_distribution;
  /// Exact final-label marginal of the discrete process.
  Distribution final_marginal;
  Distribution final_reference;
  /// Largest gamma^+ met on any path (bounds the per-step total jump rate).
  double max_total_rate{};
  /// Largest <G^dag G> bound, ||G||^2, met on any path.
  double max_generator_norm2{};
};

/// Streaming enumeration for n_steps <= kMaxEnumerationSteps.
EnumerationSummary summarize_enumeration(
    const SimConfig& config, int n_steps,
    ReversedKernel kernel = ReversedKernel::exact_adjoint,
    std::optional<Distribution> final_reference = std::nullopt,
    bool check_fluctuation_relation = true);

/// Max relative deviation of P_fwd / (P_rev e^J) from 1 over all paths.
double per_path_fr_check(const SimConfig& config, int n_steps,
                         ReversedKernel kernel = ReversedKernel::exact_adjoint);

/// Jump-count law extrapolated to dt -> 0 from enumerations at the given
/// step counts (polynomial fit in dt through all points).
std::vector<double> extrapolated_jump_counts(const SimConfig& config,
                                             std::span<const int> step_counts);

// ---------------------------------------------------------------------------
// Fixed-temperature Lindblad equation.

struct DensityCheckpoint {
  double time{};
  Matrix2cd rho;
};

/// Integrates d rho/dt = -i[H_2, rho] + gamma^+ D[a_t] rho + gamma^- D[a_t*] rho
/// at T = T0 and reports rho at each requested time (ascending, within the
/// horizon). Requires kappa = 0.
std::vector<DensityCheckpoint> lindblad_fixed_T(const SimConfig& config,
                                                std::span<const double> times,
                                                const Matrix2cd& rho0,
                                                const Tolerances& tol = {});

/// Same, starting from the preparation mixture diag(P_i(down), P_i(up)).
std::vector<DensityCheckpoint> lindblad_fixed_T(const SimConfig& config,
                                                std::span<const double> times,
                                                const Tolerances& tol = {});

/// P_f of the forward process at kappa = 0, from the Lindblad solution.
Distribution lindblad_final_marginal(const SimConfig& config,
                                     const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Joint qubit / calorimeter master equation on the squared-temperature
// lattice T_m^2 = T0^2 + m kappa omega0 (undriven protocols only).

struct TemperatureLattice {
  double base_T2{};
  double spacing{};
  int m_min{};
  /// Density block of level m_min + k at index k.
  std::vector<Matrix2cd> blocks;
  double time{};

  int m_max() const { return m_min + static_cast<int>(blocks.size()) - 1; }
  double temperature(int m) const;
  const Matrix2cd& block(int m) const { return blocks.at(m - m_min); }
  double trace() const;
  /// Qubit marginal, summed over temperature levels.
  Matrix2cd marginal() const;
  /// Weight of (label, level m).
  double weight(Level label, int m) const;
};

/// Evolves the lattice from rho0 placed on level 0 and reports snapshots at
/// the given times. The window grows on demand until the weight escaping it
/// stays below 1e-12; weight pushed below T^2 = 0 throws LatticeBoundsError.
std::vector<TemperatureLattice> joint_master_equation(
    const SimConfig& config, std::span<const double> times,
    const Matrix2cd& rho0, const Tolerances& tol = {});

/// Max-entry norm of d(lattice)/dt.
double master_equation_residual(const SimConfig& config,
                                const TemperatureLattice& lattice);

/// Closed-form stationary state of the two-level classical chain reached
/// from (label, T0): odds P(up, T_lo) / P(down, T_hi) = gamma^-(T_hi) /
/// gamma^+(T_lo).
TemperatureLattice two_state_fixed_point(const SimConfig& config,
                                         Level initial);

}  // namespace qcal
