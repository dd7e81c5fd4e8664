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

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "qcal/engine.hpp"
#include "qcal/errors.hpp"
#include "qcal/path_thermo.hpp"
#include "reference.hpp"

using namespace qcal;

namespace {

JumpRecord make_jump(const SimConfig& c, double t, int x, double T) {
  JumpRecord j;
  j.time = t;
  j.x = x;
  j.gap = eigenframe(t, c.physics, c.drive).omega;
  j.temp_before = T;
  j.temp_after = temperature_after_jump(T, j.gap, x, c.physics);
  j.rate = rates(j.gap, T, c.physics).of(x);
  return j;
}

Trajectory single_emission(const SimConfig& c, double t) {
  Trajectory tr;
  tr.initial_label = Level::up;
  tr.final_label = Level::down;
  tr.final_state = basis_state<double>(Level::down);
  tr.jumps.push_back(make_jump(c, t, +1, c.physics.T0));
  tr.segments = {{c.t_i(), t, 0.0}, {t, c.t_f(), 0.0}};
  tr.final_temperature = tr.jumps.back().temp_after;
  return tr;
}

}  // namespace

TEST_CASE("entropy flux of a single emission at fixed temperature") {
  for (double T : {0.3, 1.0, 4.0}) {
    auto c = fixtures::undriven(0.5, T);
    const Trajectory tr = single_emission(c, 1.0);
    CHECK(entropy_flux(tr, c.physics, c.drive) == doctest::Approx(1.0 / T).epsilon(1e-13));
    // Uniform end-point laws: sigma reduces to J.
    CHECK(entropy_production(tr, c.measurement, c.physics, c.drive) ==
          doctest::Approx(1.0 / T).epsilon(1e-13));
  }
}

TEST_CASE("entropy flux uses the post-jump temperature for the reverse rate") {
  auto c = fixtures::driven(0.8, 0.9, 0.05);
  Trajectory tr;
  tr.initial_label = Level::up;
  tr.final_label = Level::up;
  tr.final_state = basis_state<double>(Level::up);
  double T = c.physics.T0;
  double expected = 0;
  for (auto [t, x] : {std::pair{0.7, +1}, {1.6, -1}, {2.9, +1}, {3.3, -1}}) {
    const JumpRecord j = make_jump(c, t, x, T);
    const ref::Frame f = ref::frame(1.0, c.drive.lambda(t));
    const ref::Rates before = ref::rates(0.8, f.omega, T);
    const ref::Rates after = ref::rates(0.8, f.omega, j.temp_after);
    expected += x > 0 ? std::log(before.up) - std::log(after.down)
                      : std::log(before.down) - std::log(after.up);
    T = j.temp_after;
    tr.jumps.push_back(j);
  }
  CHECK(entropy_flux(tr, c.physics, c.drive) == doctest::Approx(expected).epsilon(1e-12));

  double sum = 0;
  for (const HeatRecord& h : heat_decomposition(tr, c.physics, c.drive))
    sum += h.delta_s_eq + h.beta * h.heat;
  CHECK(sum == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("heat decomposition on sampled trajectories") {
  auto c = fixtures::driven(0.9, 0.7, 0.03);
  const TrajectorySet set = run_ensemble(c, 200, 8);
  REQUIRE(set.failures.empty());
  for (const Trajectory& tr : set.trajectories) {
    double sum = 0, q = 0;
    const auto heat = heat_decomposition(tr, c.physics, c.drive);
    REQUIRE(heat.size() == tr.jumps.size());
    for (std::size_t k = 0; k < heat.size(); ++k) {
      sum += heat[k].delta_s_eq + heat[k].beta * heat[k].heat;
      q += heat[k].heat;
      CHECK(heat[k].heat == tr.jumps[k].gap * tr.jumps[k].x);
      CHECK(heat[k].beta == 1.0 / (tr.jumps[k].x > 0 ? tr.jumps[k].temp_before
                                                      : tr.jumps[k].temp_after));
    }
    const double J = entropy_flux(tr, c.physics, c.drive);
    CHECK(std::abs(sum - J) < 1e-11 * (1 + std::abs(J)));
    CHECK(work_and_energy(tr, c.physics, c.drive).Q_total == doctest::Approx(q));
  }
}

TEST_CASE("closed system produces no entropy") {
  auto c = fixtures::driven(0.0, 1.0);
  const TrajectorySet set = run_ensemble(c, 50, 4);
  for (const Trajectory& tr : set.trajectories) {
    CHECK(entropy_flux(tr, c.physics, c.drive) == 0.0);
    CHECK(entropy_production(tr, c.measurement, c.physics, c.drive) == 0.0);
  }
}

TEST_CASE("undriven trajectories do no work") {
  auto c = fixtures::undriven(0.7, 1.0);
  const TrajectorySet set = run_ensemble(c, 100, 6);
  for (const Trajectory& tr : set.trajectories) {
    CHECK(tr.total_work() == 0.0);
    const WorkAndEnergy we = work_and_energy(tr, c.physics, c.drive);
    CHECK(we.W == 0.0);
    // Eigenstates throughout, so the first law holds path by path.
    CHECK(std::abs(we.E_f - we.E_i + we.Q_total) < 1e-12);
  }
}

TEST_CASE("closed driven system: work is the energy change") {
  auto c = fixtures::driven(0.0, 1.0, 0.0, 4.0, 0.8);
  c.measurement.initial = Distribution::certain(Level::up);
  const Trajectory tr = sample_trajectory(c, 1);
  const WorkAndEnergy we = work_and_energy(tr, c.physics, c.drive);
  CHECK(we.E_i == doctest::Approx(1.0));
  CHECK(std::abs(we.W - (we.E_f - we.E_i)) < 1e-8);
  CHECK(std::abs(we.W) > 1e-3);
  CHECK(std::abs(work_by_reintegration(tr, c.physics, c.drive) - we.W) < 1e-8);
}

TEST_CASE("integrated work agrees with an independent reintegration") {
  auto c = fixtures::driven(0.8, 1.0);
  const TrajectorySet set = run_ensemble(c, 100, 12);
  for (const Trajectory& tr : set.trajectories)
    CHECK(std::abs(work_by_reintegration(tr, c.physics, c.drive) - tr.total_work()) < 1e-7);
}

TEST_CASE("first law holds on average") {
  auto c = fixtures::driven(0.8, 1.0);
  const TrajectorySet set = run_ensemble(c, 4000, 21);
  const FirstLawResidual r = first_law_residual(set, c.physics, c.drive);
  CHECK(r.n == 4000);
  CHECK(r.residual < 4 * r.std_error + 1e-9);
  CHECK(std::abs(r.mean_delta_e - r.mean_work + r.mean_heat) == doctest::Approx(r.residual));
}

TEST_CASE("impossible end points have infinite entropy") {
  auto c = fixtures::undriven(0.5, 1.0);
  Trajectory tr = single_emission(c, 1.0);
  MeasurementModel mm;
  mm.initial = Distribution::certain(Level::down);
  mm.final = Distribution::uniform();
  CHECK_THROWS_AS(entropy_production(tr, mm, c.physics, c.drive), InfiniteEntropy);
  mm.initial = Distribution::uniform();
  mm.final = Distribution::certain(Level::up);
  CHECK_THROWS_AS(entropy_production(tr, mm, c.physics, c.drive), InfiniteEntropy);
  mm.final = Distribution{0.25, 0.75};
  CHECK(entropy_production(tr, mm, c.physics, c.drive) ==
        doctest::Approx(-std::log(0.75) + std::log(0.5) + 1.0));
}

TEST_CASE("path thermo bundles the pieces") {
  auto c = fixtures::driven(0.6, 0.8, 0.02);
  const Trajectory tr = sample_trajectory(c, 77);
  const PathThermo p = path_thermo(tr, c.measurement, c.physics, c.drive);
  CHECK(p.J == entropy_flux(tr, c.physics, c.drive));
  CHECK(p.sigma == doctest::Approx(p.S_f - p.S_i + p.J));
  CHECK(p.W == tr.total_work());
  CHECK(p.heat.size() == tr.jumps.size());
  const WorkAndEnergy post =
      work_and_energy(tr, c.physics, c.drive, EnergyAccounting::post_measurement);
  const EigenFrame f = eigenframe(c.t_f(), c.physics, c.drive);
  CHECK(post.E_f == doctest::Approx(f.ground_energy +
                                    (tr.final_label == Level::up ? f.omega : 0.0)));
}
