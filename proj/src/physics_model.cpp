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

#include "qcal/physics_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qcal {

namespace {

void require_in_horizon(double t, const DriveProtocol& drive) {
  if (!drive.contains(t)) {
    std::ostringstream os;
    os << "time " << t << " outside the protocol horizon [" << drive.t_i()
       << ", " << drive.t_f() << "]";
    throw DomainError(os.str());
  }
}

}  // namespace

void validate(const PhysicalParams& params) {
  if (!(params.omega0 > 0)) throw ValidationError("omega0 must be > 0");
  if (!(params.gamma >= 0)) throw ValidationError("gamma must be >= 0");
  if (!(params.kappa >= 0)) throw ValidationError("kappa must be >= 0");
  if (params.emission_only) {
    if (!(params.T0 >= 0)) throw ValidationError("T0 must be >= 0");
  } else if (!(params.T0 > 0)) {
    throw ValidationError(
        "T0 must be > 0 (T0 = 0 requires emission_only mode)");
  }
}

DriveProtocol DriveProtocol::undriven(double t_i, double t_f) {
  return sin2(t_i, t_f, 0.0);
}

DriveProtocol DriveProtocol::sin2(double t_i, double t_f, double lambda_max) {
  if (!(t_f > t_i)) throw ValidationError("horizon must satisfy t_f > t_i");
  if (!std::isfinite(lambda_max))
    throw ValidationError("lambda_max must be finite");
  DriveProtocol p;
  p.kind_ = Kind::sin2;
  p.t_i_ = t_i;
  p.t_f_ = t_f;
  p.lambda_max_ = lambda_max;
  return p;
}

DriveProtocol DriveProtocol::tabulated(std::vector<double> times,
                                       std::vector<double> values) {
  if (times.size() < 2 || times.size() != values.size())
    throw ValidationError(
        "tabulated drive needs >= 2 (time, lambda) pairs of equal length");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1]))
      throw ValidationError("tabulated drive times must strictly increase");
  }
  constexpr double endpoint_tol = 1e-12;
  if (std::abs(values.front()) > endpoint_tol)
    throw ValidationError("drive does not vanish at t_i");
  if (std::abs(values.back()) > endpoint_tol)
    throw ValidationError("drive does not vanish at t_f");

  DriveProtocol p;
  p.kind_ = Kind::tabulated;
  p.t_i_ = times.front();
  p.t_f_ = times.back();
  const std::size_t n = times.size();
  p.slopes_.resize(n);
  // Catmull-Rom style slopes (non-uniform), one-sided at the ends.
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0) {
      p.slopes_[k] = (values[1] - values[0]) / (times[1] - times[0]);
    } else if (k == n - 1) {
      p.slopes_[k] =
          (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
    } else {
      p.slopes_[k] =
          (values[k + 1] - values[k - 1]) / (times[k + 1] - times[k - 1]);
    }
  }
  p.lambda_max_ = 0;
  for (double v : values) p.lambda_max_ = std::max(p.lambda_max_, std::abs(v));
  p.times_ = std::move(times);
  p.values_ = std::move(values);
  return p;
}

bool DriveProtocol::is_undriven() const {
  if (kind_ == Kind::sin2) return lambda_max_ == 0;
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0; });
}

double DriveProtocol::lambda(double t) const {
  if (kind_ == Kind::sin2) {
    if (lambda_max_ == 0) return 0;
    const double s = std::sin(std::numbers::pi * (t - t_i_) / duration());
    return lambda_max_ * s * s;
  }
  if (t <= t_i_ || t >= t_f_) return 0;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double h = times_[k + 1] - times_[k];
  const double u = (t - times_[k]) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * values_[k] + (u3 - 2 * u2 + u) * h * slopes_[k] +
         (-2 * u3 + 3 * u2) * values_[k + 1] + (u3 - u2) * h * slopes_[k + 1];
}

double DriveProtocol::dlambda_dt(double t) const {
  if (kind_ == Kind::sin2) {
    if (lambda_max_ == 0) return 0;
    const double w = std::numbers::pi / duration();
    return lambda_max_ * w * std::sin(2 * w * (t - t_i_));
  }
  if (t < t_i_ || t > t_f_) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) --it;
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double h = times_[k + 1] - times_[k];
  const double u = (t - times_[k]) / h;
  const double u2 = u * u;
  return ((6 * u2 - 6 * u) * values_[k] + (3 * u2 - 4 * u + 1) * h * slopes_[k] +
          (-6 * u2 + 6 * u) * values_[k + 1] +
          (3 * u2 - 2 * u) * h * slopes_[k + 1]) /
         h;
}

Matrix2cd build_hamiltonian(double t, const PhysicalParams& params,
                            const DriveProtocol& drive) {
  require_in_horizon(t, drive);
  return hamiltonian_matrix(params.omega0, drive.lambda(t));
}

EigenFrame eigenframe(double t, const PhysicalParams& params,
                      const DriveProtocol& drive) {
  require_in_horizon(t, drive);
  return eigenframe_from_drive(params.omega0, drive.lambda(t));
}

RatePair rates(double omega_t, double T, const PhysicalParams& params) {
  if (!(omega_t > 0)) throw DomainError("gap must be > 0");
  if (params.emission_only) {
    if (!(T >= 0)) throw DomainError("temperature must be >= 0");
    return {params.gamma, 0.0};
  }
  if (!(T > 0))
    throw DomainError("absorption rate undefined at T <= 0 (T = " +
                      std::to_string(T) + ")");
  return rate_pair(params.gamma, omega_t, T);
}

RatePair log_rates(double omega_t, double T, const PhysicalParams& params) {
  if (!(omega_t > 0)) throw DomainError("gap must be > 0");
  if (params.emission_only || !(params.gamma > 0))
    throw DomainError("zero jump rate has no logarithm");
  if (!(T > 0)) throw DomainError("log rates undefined at T <= 0");
  return log_rate_pair(params.gamma, omega_t, T);
}

double temperature_after_jump(double T, double omega_t, int x,
                              const PhysicalParams& params) {
  if (x != 1 && x != -1) throw DomainError("jump direction must be +1 or -1");
  if (!(T >= 0)) throw DomainError("temperature must be >= 0");
  const double squared = T * T + x * params.kappa * omega_t;
  // An emission never cools; at T = 0 with kappa = 0 it leaves T at zero.
  if (x < 0 && !(squared > 0)) {
    std::ostringstream os;
    os << "calorimeter exhausted: absorbing " << omega_t << " at T = " << T
       << " leaves T^2 = " << squared;
    throw CalorimeterExhausted(os.str());
  }
  return std::sqrt(squared);
}

double equilibrium_entropy_at_gap(double omega_t, double T,
                                  const PhysicalParams& params) {
  if (params.emission_only)
    throw DomainError("S_eq is not defined in emission-only mode");
  if (!(T > 0)) throw DomainError("S_eq undefined at T <= 0");
  return -log_rates(omega_t, T, params).down;
}

double equilibrium_entropy(double t, double T, const PhysicalParams& params,
                           const DriveProtocol& drive) {
  return equilibrium_entropy_at_gap(eigenframe(t, params, drive).omega, T,
                                    params);
}

}  // namespace qcal
