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

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qcal/errors.hpp"
#include "qcal/types.hpp"

namespace qcal {

/// Qubit and calorimeter constants in natural units (hbar = k_B = 1).
///
/// Temperatures carry energy units. `kappa` is the Sommerfeld constant that
/// converts an energy change of the calorimeter into a change of its squared
/// temperature, d(T^2) = kappa dE; kappa = 0 models an infinite calorimeter
/// whose temperature never moves.
template <typename Scalar = double>
struct BasicPhysicalParams {
  Scalar omega0{1};
  Scalar gamma{1};
  Scalar kappa{0};
  Scalar T0{1};
  /// Zero-temperature limit: absorption rate is identically zero and the
  /// emission rate is gamma. T0 = 0 is only admissible in this mode.
  bool emission_only{false};
};

using PhysicalParams = BasicPhysicalParams<double>;

/// Throws ValidationError naming the violated invariant.
void validate(const PhysicalParams& params);

/// Real drive amplitude lambda_t on the horizon [t_i, t_f], entering the qubit
/// Hamiltonian as lambda_t (i a - i a*).
///
/// Two families are provided: the raised-sine pulse
/// lambda_t = lambda_max sin^2(pi (t - t_i) / (t_f - t_i)) (lambda_max = 0 is the
/// undriven protocol) and a tabulated protocol interpolated by a C^1 cubic
/// Hermite spline. Both vanish at the horizon endpoints.
class DriveProtocol {
 public:
  enum class Kind { sin2, tabulated };

  DriveProtocol() = default;

  static DriveProtocol undriven(double t_i, double t_f);
  static DriveProtocol sin2(double t_i, double t_f, double lambda_max);
  /// Throws ValidationError unless the table spans exactly [t_i, t_f] with
  /// strictly increasing times and vanishing endpoint amplitudes.
  static DriveProtocol tabulated(std::vector<double> times,
                                 std::vector<double> values);

  Kind kind() const { return kind_; }
  double t_i() const { return t_i_; }
  double t_f() const { return t_f_; }
  double duration() const { return t_f_ - t_i_; }
  double lambda_max() const { return lambda_max_; }
  const std::vector<double>& table_times() const { return times_; }
  const std::vector<double>& table_values() const { return values_; }
  bool is_undriven() const;

  bool contains(double t) const { return t >= t_i_ && t <= t_f_; }
  /// Image of t under the time reversal t -> t_i + t_f - t.
  double mirror(double t) const { return t_i_ + t_f_ - t; }

  /// Drive amplitude. Evaluation slightly outside the horizon is allowed
  /// (integrator stages); the public model functions check the domain.
  double lambda(double t) const;
  double dlambda_dt(double t) const;
  /// Drive angle with lambda_t = (omega0 / 2) tan(theta_t).
  double theta(double t, double omega0) const {
    return std::atan2(2.0 * lambda(t), omega0);
  }

  friend bool operator==(const DriveProtocol&, const DriveProtocol&) = default;

 private:
  Kind kind_{Kind::sin2};
  double t_i_{0};
  double t_f_{1};
  double lambda_max_{0};
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Instantaneous eigenframe of H_2(t): gap, ground energy, the lowering and
/// raising operators a_t, a_t* and the unitary U_t with a_t = U_t^dag a U_t.
template <typename Scalar = double>
struct BasicEigenFrame {
  Scalar omega{};
  Scalar ground_energy{};
  Matrix2c<Scalar> lower;
  Matrix2c<Scalar> raise;
  Matrix2c<Scalar> transform;

  /// a_t* a_t, the projector onto the excited eigenvector.
  Matrix2c<Scalar> excited_projector() const { return raise * lower; }
  /// a_t a_t*, the projector onto the ground eigenvector.
  Matrix2c<Scalar> ground_projector() const { return lower * raise; }
};

using EigenFrame = BasicEigenFrame<double>;

/// Emission (up) and absorption (down) rates. Both are strictly positive for
/// T > 0 and satisfy up / down = exp(omega / T).
template <typename Scalar = double>
struct BasicRatePair {
  Scalar up{};
  Scalar down{};

  Scalar total() const { return up + down; }
  /// Rate gamma^x for jump direction x = +1 (emission) or -1 (absorption).
  Scalar of(int x) const { return x > 0 ? up : down; }
};

using RatePair = BasicRatePair<double>;

// ---------------------------------------------------------------------------
// Scalar-generic kernels.

/// H_2 = omega0 a*a + lambda (i a - i a*) in the bare basis {|down>, |up>}.
template <typename Scalar>
Matrix2c<Scalar> hamiltonian_matrix(Scalar omega0, Scalar lambda) {
  const Complex<Scalar> i(0, 1);
  Matrix2c<Scalar> h;
  h << Complex<Scalar>(0), i * lambda,
      -i * lambda, Complex<Scalar>(omega0);
  return h;
}

/// Eigenframe from the closed-form half-angle unitary. Continuous in lambda,
/// so no eigenvector phase can flip along a protocol.
template <typename Scalar>
BasicEigenFrame<Scalar> eigenframe_from_drive(Scalar omega0, Scalar lambda) {
  using std::sqrt;
  const Complex<Scalar> i(0, 1);
  BasicEigenFrame<Scalar> frame;
  frame.omega = sqrt(omega0 * omega0 + Scalar(4) * lambda * lambda);
  frame.ground_energy = (omega0 - frame.omega) / Scalar(2);
  const Scalar cos_theta = omega0 / frame.omega;
  const Scalar sin_theta = Scalar(2) * lambda / frame.omega;
  const Scalar c = sqrt((Scalar(1) + cos_theta) / Scalar(2));
  const Scalar s = sin_theta / (Scalar(2) * c);
  frame.transform << Complex<Scalar>(c), -i * s, -i * s, Complex<Scalar>(c);
  frame.lower =
      frame.transform.adjoint() * bare_lowering<Scalar>() * frame.transform;
  frame.raise = frame.lower.adjoint();
  return frame;
}

/// gamma^+ = gamma / (1 - e^{-omega/T}), gamma^- = gamma / (e^{omega/T} - 1).
template <typename Scalar>
BasicRatePair<Scalar> rate_pair(Scalar gamma, Scalar omega, Scalar T) {
  using std::expm1;
  const Scalar x = omega / T;
  return {gamma / -expm1(-x), gamma / expm1(x)};
}

/// Natural logarithms of rate_pair, finite for every omega/T > 0.
template <typename Scalar>
BasicRatePair<Scalar> log_rate_pair(Scalar gamma, Scalar omega, Scalar T) {
  using std::exp;
  using std::log;
  using std::log1p;
  const Scalar x = omega / T;
  const Scalar tail = log1p(-exp(-x));
  return {log(gamma) - tail, log(gamma) - x - tail};
}

// ---------------------------------------------------------------------------
// Model functions on the configured protocol.

/// H_2(t). Throws DomainError for t outside the drive horizon.
Matrix2cd build_hamiltonian(double t, const PhysicalParams& params,
                            const DriveProtocol& drive);

/// Throws DomainError for t outside the drive horizon.
EigenFrame eigenframe(double t, const PhysicalParams& params,
                      const DriveProtocol& drive);

/// Jump rates at gap omega_t and temperature T. In emission-only mode the pair
/// is (gamma, 0) for any T >= 0; otherwise T <= 0 is a DomainError.
RatePair rates(double omega_t, double T, const PhysicalParams& params);

/// Logarithms of rates(); DomainError whenever a rate vanishes.
RatePair log_rates(double omega_t, double T, const PhysicalParams& params);

/// sqrt(T^2 + x kappa omega_t). Throws CalorimeterExhausted when an absorption
/// (x = -1) would leave T^2 <= 0.
double temperature_after_jump(double T, double omega_t, int x,
                              const PhysicalParams& params);

/// Calorimeter equilibrium entropy S_eq(t, T) = -ln gamma^-_t(T).
double equilibrium_entropy(double t, double T, const PhysicalParams& params,
                           const DriveProtocol& drive);

/// Same quantity at a known gap, for callers that already hold omega_t.
double equilibrium_entropy_at_gap(double omega_t, double T,
                                  const PhysicalParams& params);

}  // namespace qcal
