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

#include "qcal/config.hpp"
#include "qcal/physics_model.hpp"

namespace fixtures {

inline qcal::SimConfig make(double omega0, double gamma, double T0,
                            double kappa, qcal::DriveProtocol drive) {
  qcal::SimConfig c;
  c.physics.omega0 = omega0;
  c.physics.gamma = gamma;
  c.physics.T0 = T0;
  c.physics.kappa = kappa;
  c.drive = std::move(drive);
  c.measurement.initial = qcal::Distribution::uniform();
  c.measurement.final = qcal::Distribution::uniform();
  c.measurement.final_source = qcal::FinalSource::configured;
  return c;
}

inline qcal::SimConfig undriven(double gamma = 0.5, double T0 = 1.0,
                                double kappa = 0.0, double t_f = 4.0) {
  return make(1.0, gamma, T0, kappa, qcal::DriveProtocol::undriven(0.0, t_f));
}

inline qcal::SimConfig driven(double gamma = 0.5, double T0 = 1.0,
                              double kappa = 0.0, double t_f = 4.0,
                              double lambda_max = 0.5) {
  return make(1.0, gamma, T0, kappa,
              qcal::DriveProtocol::sin2(0.0, t_f, lambda_max));
}

/// T -> 0+ limit: absorption switched off, emission at rate gamma.
inline qcal::SimConfig zero_temperature(double gamma = 1.0, double t_f = 4.0) {
  qcal::SimConfig c = undriven(gamma, 0.0, 0.0, t_f);
  c.physics.emission_only = true;
  return c;
}

}  // namespace fixtures
