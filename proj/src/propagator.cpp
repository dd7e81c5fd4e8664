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

#include "qcal/propagator.hpp"

#include <stdexcept>

namespace qcal {

namespace {

struct ColumnSystem {
  const PhysicalParams& params;
  const DriveProtocol& drive;
  Direction direction;
  double temperature;

  VectorN<double, 4> operator()(double t, const VectorN<double, 4>& y) const {
    const Matrix2cd g =
        generator_matrix(t, temperature, params, drive, direction);
    const Vector2cd dphi = Complex<double>(0, -1) * (g * unpack_state(y));
    VectorN<double, 4> out;
    pack_state(dphi, out);
    return out;
  }
};

void check_interval(double s, double t, const DriveProtocol& drive,
                    Direction direction) {
  if (!(s <= t)) throw DomainError("propagation requires s <= t");
  // Reversed-process times live on the same horizon as forward times.
  (void)direction;
  if (!drive.contains(s) || !drive.contains(t))
    throw DomainError("propagation interval outside the protocol horizon");
}

}  // namespace

Matrix2cd damping_operator(const EigenFrame& frame, const RatePair& rates) {
  return rates.up * frame.excited_projector() +
         rates.down * frame.ground_projector();
}

Matrix2cd generator_matrix(double t, double T, const PhysicalParams& params,
                           const DriveProtocol& drive, Direction direction) {
  const double tp = physical_time(t, drive, direction);
  const double lambda = drive.lambda(tp);
  const double omega = std::sqrt(params.omega0 * params.omega0 +
                                 4.0 * lambda * lambda);
  const double cos_theta = params.omega0 / omega;
  const double sin_theta = 2.0 * lambda / omega;
  const RatePair r = rates(omega, T, params);
  // Gamma = gamma^- I + (gamma^+ - gamma^-) P_excited, with
  // P_excited = [[sin^2(theta/2), i sin(theta)/2], [-i sin(theta)/2, cos^2(theta/2)]].
  const double diff = r.up - r.down;
  const double pe00 = 0.5 * (1.0 - cos_theta);
  const double pe11 = 0.5 * (1.0 + cos_theta);
  const double pe01 = 0.5 * sin_theta;
  const double sign = direction == Direction::forward ? 1.0 : -1.0;
  const Complex<double> i(0, 1);
  Matrix2cd g;
  g(0, 0) = Complex<double>(0, -0.5 * (r.down + diff * pe00));
  g(1, 1) = sign * params.omega0 - 0.5 * i * (r.down + diff * pe11);
  // +-H_2 off-diagonals are +-(i lambda, -i lambda); Gamma's are
  // (i pe01, -i pe01) times diff.
  g(0, 1) = sign * i * lambda - 0.5 * i * (i * diff * pe01);
  g(1, 0) = -sign * i * lambda - 0.5 * i * (-i * diff * pe01);
  return g;
}

Generator generator(double t, double T, const PhysicalParams& params,
                    const DriveProtocol& drive, Direction direction) {
  const double tp = physical_time(t, drive, direction);
  const EigenFrame frame = eigenframe(tp, params, drive);
  const RatePair r = rates(frame.omega, T, params);
  const Matrix2cd h = build_hamiltonian(tp, params, drive);
  const Matrix2cd damping = damping_operator(frame, r);
  const double sign = direction == Direction::forward ? 1.0 : -1.0;
  return {sign * h - Complex<double>(0, 0.5) * damping, direction, t, T};
}

PropagationResult propagate(const Vector2cd& state, double s, double t,
                            double T, const PhysicalParams& params,
                            const DriveProtocol& drive, Direction direction,
                            const Tolerances& tol) {
  check_interval(s, t, drive, direction);
  const double start_norm2 = state.squaredNorm();
  if (!(start_norm2 > 0)) throw DomainError("cannot propagate the zero vector");
  (void)rates(params.omega0, T, params);  // validates T

  PropagationResult result;
  if (s == t) {
    result.state = state;
    return result;
  }
  ColumnSystem sys{params, drive, direction, T};
  VectorN<double, 4> y;
  pack_state(state, y);
  y = integrate(sys, s, t, y, tol, &result.steps_taken);
  result.state = unpack_state(y);
  result.survival = result.state.squaredNorm() / start_norm2;
  return result;
}

Matrix2cd propagator_matrix(double s, double t, double T,
                            const PhysicalParams& params,
                            const DriveProtocol& drive, Direction direction,
                            const Tolerances& tol) {
  Matrix2cd u;
  for (int col = 0; col < 2; ++col) {
    const Vector2cd e = basis_state(static_cast<Level>(col));
    u.col(col) =
        propagate(e, s, t, T, params, drive, direction, tol).state;
  }
  return u;
}

double reversed_adjoint_check(double s, double t, double T,
                              const PhysicalParams& params,
                              const DriveProtocol& drive,
                              const Tolerances& tol) {
  if (s == t) return 0.0;
  const Matrix2cd reversed =
      propagator_matrix(s, t, T, params, drive, Direction::reversed, tol);
  const Matrix2cd forward =
      propagator_matrix(drive.mirror(t), drive.mirror(s), T, params, drive,
                        Direction::forward, tol);
  return (reversed - forward.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace qcal
