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

#include "qcal/path_thermo.hpp"

#include <cmath>
#include <sstream>

#include "qcal/errors.hpp"
#include "qcal/propagator.hpp"

namespace qcal {

namespace {

double gap_at(double t, const Trajectory& traj, const PhysicalParams& params,
              const DriveProtocol& drive) {
  const double tp = physical_time(t, drive, traj.direction);
  return eigenframe(tp, params, drive).omega;
}

double boundary_entropy(const Distribution& d, Level label, const char* name) {
  const double p = d.of(label);
  if (!(p > 0)) {
    std::ostringstream os;
    os << name << " assigns zero probability to the observed label "
       << to_string(label) << "; its boundary entropy is infinite";
    throw InfiniteEntropy(os.str());
  }
  return -std::log(p);
}

double energy(const Vector2cd& phi, const Matrix2cd& h) {
  return std::real(phi.dot(h * phi)) / phi.squaredNorm();
}

}  // namespace

double entropy_flux(const Trajectory& traj, const PhysicalParams& params,
                    const DriveProtocol& drive) {
  double J = 0;
  for (const JumpRecord& jump : traj.jumps) {
    const double omega = gap_at(jump.time, traj, params, drive);
    const RatePair before = log_rates(omega, jump.temp_before, params);
    const RatePair after = log_rates(omega, jump.temp_after, params);
    J += before.of(jump.x) - after.of(-jump.x);
  }
  return J;
}

std::vector<HeatRecord> heat_decomposition(const Trajectory& traj,
                                           const PhysicalParams& params,
                                           const DriveProtocol& drive) {
  std::vector<HeatRecord> out;
  out.reserve(traj.jumps.size());
  for (const JumpRecord& jump : traj.jumps) {
    const double omega = gap_at(jump.time, traj, params, drive);
    HeatRecord rec;
    rec.time = jump.time;
    rec.heat = omega * jump.x;
    rec.beta = 1.0 / (jump.x > 0 ? jump.temp_before : jump.temp_after);
    rec.delta_s_eq = equilibrium_entropy_at_gap(omega, jump.temp_after, params) -
                     equilibrium_entropy_at_gap(omega, jump.temp_before, params);
    out.push_back(rec);
  }
  return out;
}

double entropy_production(const Trajectory& traj, const MeasurementModel& mm,
                          const PhysicalParams& params,
                          const DriveProtocol& drive) {
  const double s_i = boundary_entropy(mm.initial, traj.initial_label, "P_i");
  const double s_f = boundary_entropy(mm.final, traj.final_label, "P_f");
  return s_f - s_i + entropy_flux(traj, params, drive);
}

WorkAndEnergy work_and_energy(const Trajectory& traj,
                              const PhysicalParams& params,
                              const DriveProtocol& drive,
                              EnergyAccounting accounting) {
  WorkAndEnergy out;
  out.W = traj.total_work();
  for (const JumpRecord& jump : traj.jumps) out.Q_total += jump.gap * jump.x;
  const double t_start = physical_time(drive.t_i(), drive, traj.direction);
  const double t_end = physical_time(drive.t_f(), drive, traj.direction);
  out.E_i = energy(basis_state(traj.initial_label),
                   build_hamiltonian(t_start, params, drive));
  if (accounting == EnergyAccounting::pre_measurement) {
    out.E_f = energy(traj.final_state, build_hamiltonian(t_end, params, drive));
  } else {
    out.E_f = energy(basis_state(traj.final_label),
                     build_hamiltonian(t_end, params, drive));
  }
  return out;
}

double work_by_reintegration(const Trajectory& traj,
                             const PhysicalParams& params,
                             const DriveProtocol& drive,
                             const Tolerances& tol) {
  if (traj.direction != Direction::forward)
    throw DomainError("work is defined on forward trajectories");
  double total = 0;
  Vector2cd start = basis_state(traj.initial_label);
  double T = params.T0;
  for (std::size_t k = 0; k < traj.segments.size(); ++k) {
    const Segment& seg = traj.segments[k];
    if (k > 0) {
      const JumpRecord& jump = traj.jumps[k - 1];
      const EigenFrame frame = eigenframe(jump.time, params, drive);
      // A jump leaves the qubit in an instantaneous eigenstate.
      start = jump.x > 0 ? frame.transform.adjoint().col(0)
                         : frame.transform.adjoint().col(1);
      T = jump.temp_after;
    }
    if (!(seg.t_end > seg.t_start)) continue;
    auto rhs = [&](double t, const VectorN<double, 5>& y) {
      const Matrix2cd g =
          generator_matrix(t, T, params, drive, Direction::forward);
      const Vector2cd phi = unpack_state(y);
      VectorN<double, 5> dy;
      pack_state(Vector2cd(Complex<double>(0, -1) * (g * phi)), dy);
      const double x = -2.0 * std::imag(std::conj(phi(0)) * phi(1));
      dy(4) = drive.dlambda_dt(t) * x / phi.squaredNorm();
      return dy;
    };
    VectorN<double, 5> y;
    pack_state(start, y);
    y(4) = 0;
    y = integrate(rhs, seg.t_start, seg.t_end, y, tol);
    total += y(4);
  }
  return total;
}

PathThermo path_thermo(const Trajectory& traj, const MeasurementModel& mm,
                       const PhysicalParams& params, const DriveProtocol& drive,
                       EnergyAccounting accounting) {
  PathThermo out;
  out.J = entropy_flux(traj, params, drive);
  out.heat = heat_decomposition(traj, params, drive);
  out.S_i = boundary_entropy(mm.initial, traj.initial_label, "P_i");
  out.S_f = boundary_entropy(mm.final, traj.final_label, "P_f");
  out.sigma = out.S_f - out.S_i + out.J;
  const WorkAndEnergy we = work_and_energy(traj, params, drive, accounting);
  out.W = we.W;
  out.E_i = we.E_i;
  out.E_f = we.E_f;
  out.Q_total = we.Q_total;
  return out;
}

FirstLawResidual first_law_residual(const TrajectorySet& set,
                                    const PhysicalParams& params,
                                    const DriveProtocol& drive,
                                    EnergyAccounting accounting) {
  FirstLawResidual out;
  out.n = set.size();
  if (out.n == 0) return out;
  std::vector<double> d;
  d.reserve(out.n);
  for (const Trajectory& traj : set.trajectories) {
    const WorkAndEnergy we = work_and_energy(traj, params, drive, accounting);
    const double de = we.E_f - we.E_i;
    out.mean_delta_e += de;
    out.mean_work += we.W;
    out.mean_heat += we.Q_total;
    d.push_back(de - we.W + we.Q_total);
  }
  const double n = static_cast<double>(out.n);
  out.mean_delta_e /= n;
  out.mean_work /= n;
  out.mean_heat /= n;
  double mean = 0;
  for (double x : d) mean += x;
  mean /= n;
  out.residual = std::abs(mean);
  if (out.n > 1) {
    double ss = 0;
    for (double x : d) ss += (x - mean) * (x - mean);
    out.std_error = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

}  // namespace qcal
