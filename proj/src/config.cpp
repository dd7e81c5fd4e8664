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

#include "qcal/config.hpp"

#include <cmath>
#include <sstream>

#include "qcal/errors.hpp"

namespace qcal {

namespace {

void validate_distribution(const Distribution& d, const char* name) {
  if (!(d.up >= 0) || !(d.down >= 0))
    throw ValidationError(std::string(name) + " has a negative probability");
  if (std::abs(d.up + d.down - 1.0) > 1e-12)
    throw ValidationError(std::string(name) + " is not normalized");
}

}  // namespace

std::vector<std::string> validate(const SimConfig& config) {
  std::vector<std::string> warnings;
  validate(config.physics);
  const DriveProtocol& drive = config.drive;
  if (!(drive.t_f() > drive.t_i()))
    throw ValidationError("horizon must satisfy t_f > t_i");
  constexpr double endpoint_tol = 1e-12;
  if (std::abs(drive.lambda(drive.t_i())) > endpoint_tol)
    throw ValidationError(
        "drive does not vanish at t_i (the protocol starts undriven)");
  if (std::abs(drive.lambda(drive.t_f())) > endpoint_tol)
    throw ValidationError(
        "drive does not vanish at t_f (the final energy measurement needs an "
        "undriven qubit)");

  validate_distribution(config.measurement.initial, "P_i");
  validate_distribution(config.measurement.final, "P_f");
  if (config.reversed_preparation)
    validate_distribution(*config.reversed_preparation,
                          "reversed preparation");

  const PhononParams& ph = config.phonon;
  if (!(ph.sigma_ep >= 0)) throw ValidationError("sigma_ep must be >= 0");
  if (!(ph.T_p > 0)) throw ValidationError("phonon temperature must be > 0");
  if (ph.exponent < 1) throw ValidationError("phonon exponent must be >= 1");
  if (ph.enabled && config.physics.emission_only)
    throw ValidationError("phonon drift is not supported in emission-only mode");

  const NumericalSettings& num = config.numerics;
  if (!(num.rel_tol > 0 && num.rel_tol < 1))
    throw ValidationError("rel_tol must lie in (0, 1)");
  if (!(num.abs_tol > 0)) throw ValidationError("abs_tol must be > 0");
  if (!(num.jump_time_tol > 0 && num.jump_time_tol <= 1e-9))
    throw ValidationError("jump_time_tol must lie in (0, 1e-9]");
  if (num.checkpoints < 0) throw ValidationError("checkpoints must be >= 0");

  if (config.ensemble.n < 1) throw ValidationError("ensemble size must be >= 1");
  if (config.ensemble.workers < 1)
    throw ValidationError("workers must be >= 1");

  const PhysicalParams& p = config.physics;
  if (p.kappa * p.omega0 > kSommerfeldWarningRatio * p.T0 * p.T0) {
    std::ostringstream os;
    os << "Sommerfeld validity: kappa*omega0 = " << p.kappa * p.omega0
       << " exceeds " << kSommerfeldWarningRatio << "*T0^2 = "
       << kSommerfeldWarningRatio * p.T0 * p.T0
       << "; the squared-temperature relation is a leading-order expansion";
    warnings.push_back(os.str());
  }
  return warnings;
}

}  // namespace qcal
