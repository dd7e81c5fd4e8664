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
#include <stdexcept>

#include "fixtures.hpp"
#include "qcal/engine.hpp"
#include "qcal/errors.hpp"
#include "reference.hpp"

using namespace qcal;

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng rng(7);
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(rng);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("apply_jump maps onto the eigenstates") {
  auto c = fixtures::driven();
  const EigenFrame f = eigenframe(1.3, c.physics, c.drive);
  const Vector2cd phi = Vector2cd(0.6, Complex<double>(0.0, 0.8));
  const Vector2cd down = apply_jump(phi, f, +1);
  const Vector2cd up = apply_jump(phi, f, -1);
  CHECK(down.norm() == doctest::Approx(1.0));
  CHECK(up.norm() == doctest::Approx(1.0));
  CHECK((f.ground_projector() * down - down).norm() < 1e-14);
  CHECK((f.excited_projector() * up - up).norm() < 1e-14);

  auto u = fixtures::undriven();
  const EigenFrame bare = eigenframe(0.0, u.physics, u.drive);
  CHECK_THROWS_AS(apply_jump(basis_state<double>(Level::down), bare, +1), std::logic_error);
  CHECK_THROWS_AS(apply_jump(basis_state<double>(Level::up), bare, -1), std::logic_error);
}

TEST_CASE("closed system never jumps") {
  auto c = fixtures::driven(0.0, 1.0);
  c.numerics.checkpoints = 5;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Trajectory tr = sample_trajectory(c, s);
    CHECK(tr.jumps.empty());
    CHECK(tr.final_temperature == 1.0);
    CHECK(tr.final_state.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (const Checkpoint& cp : tr.checkpoints) {
      CHECK(cp.state.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(cp.temperature == 1.0);
    }
  }
}

TEST_CASE("ground state is dark at zero temperature") {
  auto c = fixtures::zero_temperature(1.0);
  c.measurement.initial = Distribution::certain(Level::down);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Trajectory tr = sample_trajectory(c, s);
    CHECK(tr.jumps.empty());
    CHECK(tr.final_label == Level::down);
  }
}

TEST_CASE("excited state emits once with exponential waiting time") {
  const double gamma = 1.0;
  auto c = fixtures::zero_temperature(gamma, 40.0);
  c.measurement.initial = Distribution::certain(Level::up);
  const TrajectorySet set = run_ensemble(c, 10000, 42);
  REQUIRE(set.failures.empty());
  REQUIRE(set.size() == 10000);
  double sum = 0, sum2 = 0;
  for (const Trajectory& tr : set.trajectories) {
    REQUIRE(tr.jumps.size() == 1);
    CHECK(tr.jumps[0].x == +1);
    CHECK(tr.final_label == Level::down);
    sum += tr.jumps[0].time;
    sum2 += tr.jumps[0].time * tr.jumps[0].time;
  }
  const double n = 10000;
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0 / gamma) < 4 * se);
}

TEST_CASE("jump records carry Ito rates and temperature updates") {
  auto c = fixtures::driven(0.9, 0.8, 0.05);
  const TrajectorySet set = run_ensemble(c, 300, 5);
  REQUIRE(set.failures.empty());
  std::size_t jumps = 0;
  for (const Trajectory& tr : set.trajectories) {
    double T = c.physics.T0;
    double t = c.t_i();
    for (const JumpRecord& j : tr.jumps) {
      CHECK(j.time >= t);
      CHECK(j.temp_before == T);
      CHECK(j.gap == doctest::Approx(eigenframe(j.time, c.physics, c.drive).omega).epsilon(1e-14));
      CHECK(j.rate == rates(j.gap, j.temp_before, c.physics).of(j.x));
      CHECK(j.temp_after == temperature_after_jump(j.temp_before, j.gap, j.x, c.physics));
      T = j.temp_after;
      t = j.time;
      ++jumps;
    }
    CHECK(tr.final_temperature == T);
    CHECK(tr.segments.size() == tr.jumps.size() + 1);
  }
  CHECK(jumps > 100);
}

TEST_CASE("phonon drift follows the reference integration") {
  PhysicalParams p;
  p.kappa = 0.01;
  p.T0 = 0.6;
  PhononParams ph;
  ph.enabled = true;
  ph.sigma_ep = 20;
  ph.T_p = 1.0;
  const std::vector<double> times{0.5, 1.0, 2.0, 5.0};
  const std::vector<double> expected = ref::phonon_drift(0.6, 0.01, 20, 1.0, 5, 0.0, times, 1e-4);
  double T = 0.6, t = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    T = evolve_temperature_drift(T, times[k] - t, ph, p);
    t = times[k];
    CHECK(T == doctest::Approx(expected[k]).epsilon(1e-9));
  }
  CHECK(evolve_temperature_drift(1.0, 3.0, ph, p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ensemble is reproducible and independent of worker count") {
  auto c = fixtures::driven(0.8, 1.0, 0.02);
  c.numerics.checkpoints = 4;
  const TrajectorySet one = run_ensemble(c, 1, 99);
  CHECK(one.trajectories[0] == sample_trajectory(c, derive_seed(99, 0)));

  const TrajectorySet a = run_ensemble(c, 64, 99);
  EnsembleOptions o;
  o.workers = 3;
  const TrajectorySet b = run_ensemble(c, 64, 99, o);
  CHECK(a == b);
  CHECK(a.base_seed == 99);
  CHECK(!a.config_digest.empty());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.trajectories[k].seed == derive_seed(99, k));
}

TEST_CASE("reversed undriven process has the forward jump statistics") {
  auto c = fixtures::undriven(0.6, 1.0);
  const std::uint64_t n = 20000;
  const TrajectorySet fwd = run_ensemble(c, n, 1);
  EnsembleOptions o;
  o.direction = Direction::reversed;
  const TrajectorySet rev = run_ensemble(c, n, 2, o);
  CHECK(rev.direction == Direction::reversed);
  auto moments = [](const TrajectorySet& s) {
    double m = 0, m2 = 0;
    for (const Trajectory& t : s.trajectories) {
      m += t.jumps.size();
      m2 += double(t.jumps.size()) * t.jumps.size();
    }
    m /= s.size();
    return std::pair{m, std::sqrt((m2 / s.size() - m * m) / s.size())};
  };
  const auto [mf, sf] = moments(fwd);
  const auto [mr, sr] = moments(rev);
  CHECK(std::abs(mf - mr) < 4 * std::hypot(sf, sr));
}

TEST_CASE("absorbing beyond the calorimeter energy fails the trajectory") {
  // kappa omega > T^2: the first absorption would leave T^2 < 0.
  auto c = fixtures::undriven(0.7, 0.2, 0.5);
  c.measurement.initial = Distribution::certain(Level::down);
  const TrajectorySet set = run_ensemble(c, 200, 3);
  REQUIRE(!set.failures.empty());
  CHECK(set.size() + set.failures.size() == 200);
  for (const TrajectoryFailure& f : set.failures) {
    CHECK(f.kind == "calorimeter-exhausted");
    CHECK(f.seed == derive_seed(3, f.index));
  }
  for (const Trajectory& tr : set.trajectories) CHECK(tr.jumps.empty());

  EnsembleOptions o;
  o.fail_fast = true;
  CHECK_THROWS_AS(run_ensemble(c, 200, 3, o), CalorimeterExhausted);
}
