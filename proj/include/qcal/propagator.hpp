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

#include "qcal/dormand_prince.hpp"
#include "qcal/physics_model.hpp"
#include "qcal/types.hpp"

namespace qcal {

/// Non-Hermitian no-jump generator of the forward process, G_t(T), or of the
/// reversed process, G^R_t(T), at process time `at_time`.
struct Generator {
  Matrix2cd matrix;
  Direction direction{Direction::forward};
  double at_time{};
  double at_temperature{};
};

/// Physical time at which the model is evaluated for process time t.
/// The reversed process runs the protocol backwards: t -> t_i + t_f - t.
inline double physical_time(double t, const DriveProtocol& drive,
                            Direction direction) {
  return direction == Direction::forward ? t : drive.mirror(t);
}

/// Damping operator Gamma = gamma^+ a_t* a_t + gamma^- a_t a_t*, whose
/// expectation is the total jump rate of a normalized state.
Matrix2cd damping_operator(const EigenFrame& frame, const RatePair& rates);

/// G = +-H_2 - (i/2) Gamma at the physical time of process time t, without
/// domain checks. Forward uses +H_2(t); reversed uses -H_2(t_i + t_f - t).
Matrix2cd generator_matrix(double t, double T, const PhysicalParams& params,
                           const DriveProtocol& drive, Direction direction);

/// Checked generator; throws DomainError for t outside the horizon or an
/// invalid temperature.
Generator generator(double t, double T, const PhysicalParams& params,
                    const DriveProtocol& drive, Direction direction);

struct PropagationResult {
  /// Unnormalized state U_{t,s}(T) phi.
  Vector2cd state;
  /// |U_{t,s} phi|^2 / |phi|^2.
  double survival{1};
  std::size_t steps_taken{0};
};

/// Integrates d phi/dt = -i G_t(T) phi from s to t at frozen temperature.
PropagationResult propagate(const Vector2cd& state, double s, double t,
                            double T, const PhysicalParams& params,
                            const DriveProtocol& drive, Direction direction,
                            const Tolerances& tol = {});

/// The 2x2 propagator U_{t,s}(T), integrated column by column.
Matrix2cd propagator_matrix(double s, double t, double T,
                            const PhysicalParams& params,
                            const DriveProtocol& drive, Direction direction,
                            const Tolerances& tol = {});

/// Max-entry deviation between the reversed propagator U^R_{t,s}(T) and the
/// adjoint of the forward propagator over the mirrored interval. Both sides
/// are integrated independently.
double reversed_adjoint_check(double s, double t, double T,
                              const PhysicalParams& params,
                              const DriveProtocol& drive,
                              const Tolerances& tol = {});

/// Packing of a complex 2-vector into the first four entries of a real state.
template <int Dim>
void pack_state(const Vector2cd& phi, VectorN<double, Dim>& y) {
  y(0) = phi(0).real();
  y(1) = phi(0).imag();
  y(2) = phi(1).real();
  y(3) = phi(1).imag();
}

template <int Dim>
Vector2cd unpack_state(const VectorN<double, Dim>& y) {
  return Vector2cd(Complex<double>(y(0), y(1)), Complex<double>(y(2), y(3)));
}

template <int Dim>
double packed_norm2(const VectorN<double, Dim>& y) {
  return y(0) * y(0) + y(1) * y(1) + y(2) * y(2) + y(3) * y(3);
}

}  // namespace qcal
