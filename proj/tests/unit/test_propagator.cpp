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
#include <random>

#include "fixtures.hpp"
#include "qcal/dormand_prince.hpp"
#include "qcal/propagator.hpp"
#include "reference.hpp"

using namespace qcal;

namespace {

const Complex<double> I(0, 1);

Vector2cd plus_state() {
  return Vector2cd(1.0, 1.0) / std::sqrt(2.0);
}

}  // namespace

TEST_CASE("dormand-prince integrates an oscillator to tolerance") {
  using State = VectorN<double, 2>;
  auto f = [](double, const State& y) { return State(y(1), -y(0)); };
  Tolerances tol;
  std::size_t steps = 0;
  const State y = integrate(f, 0.0, 10.0, State(1.0, 0.0), tol, &steps);
  CHECK(std::abs(y(0) - std::cos(10.0)) < 1e-9);
  CHECK(std::abs(y(1) + std::sin(10.0)) < 1e-9);
  CHECK(steps > 10);

  DormandPrince<double, 2> dp;
  dp.initialize(f, 0.0, State(1.0, 0.0), 2.0);
  while (dp.t() < 2.0) {
    dp.step(f, 2.0);
    const double mid = 0.5 * (dp.t_prev() + dp.t());
    CHECK(std::abs(dp.dense(mid)(0) - std::cos(mid)) < 1e-8);
  }
  CHECK(dp.t() == 2.0);
}

TEST_CASE("closed-system generator is the hamiltonian") {
  auto c = fixtures::driven(0.0);
  for (double t : {0.0, 1.1, 2.0, 3.7}) {
    const Generator g = generator(t, 1.0, c.physics, c.drive, Direction::forward);
    CHECK((g.matrix - build_hamiltonian(t, c.physics, c.drive)).norm() < 1e-15);
    CHECK((g.matrix - g.matrix.adjoint()).norm() < 1e-15);
  }
}

TEST_CASE("generator matches the reference construction") {
  auto c = fixtures::driven(0.7, 0.8);
  for (double t : {0.3, 1.9, 3.1}) {
    const Matrix2cd g = generator_matrix(t, 0.9, c.physics, c.drive, Direction::forward);
    const ref::Mat r = ref::generator(1.0, c.drive.lambda(t), 0.7, 0.9);
    CHECK((g - r).norm() < 1e-13);
    CHECK((g - generator(t, 0.9, c.physics, c.drive, Direction::forward).matrix).norm() < 1e-13);
  }
}

TEST_CASE("reversed generator is minus the adjoint at the mirrored time") {
  auto c = fixtures::driven(0.6, 1.2);
  for (double t : {0.0, 0.4, 1.7, 4.0}) {
    const Matrix2cd fwd = generator_matrix(t, 1.1, c.physics, c.drive, Direction::forward);
    const Matrix2cd rev = generator_matrix(c.drive.mirror(t), 1.1, c.physics, c.drive, Direction::reversed);
    CHECK((rev + fwd.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("zero-temperature decay rate of the excited state is gamma") {
  auto c = fixtures::zero_temperature(0.8);
  const Matrix2cd g = generator_matrix(0.5, 0.0, c.physics, c.drive, Direction::forward);
  const Vector2cd up = basis_state<double>(Level::up);
  // d|phi|^2/dt = 2 Im <phi|G|phi>
  const double rate = -2.0 * std::imag(up.dot(g * up));
  CHECK(rate == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("norm decay equals the total jump rate") {
  auto c = fixtures::driven(0.9, 0.7);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    Vector2cd phi(Complex<double>(n(rng), n(rng)), Complex<double>(n(rng), n(rng)));
    phi.normalize();
    const double t = 4.0 * (k + 0.5) / 200;
    const double T = 0.3 + 0.01 * k;
    const Matrix2cd g = generator_matrix(t, T, c.physics, c.drive, Direction::forward);
    const double decay = -2.0 * std::imag(phi.dot(g * phi));
    const ref::Frame f = ref::frame(1.0, c.drive.lambda(t));
    const ref::Rates r = ref::rates(0.9, f.omega, T);
    const double total = r.up * (f.a * phi).squaredNorm() +
                         r.down * (f.a.adjoint() * phi).squaredNorm();
    worst = std::max(worst, std::abs(decay - total));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("propagation over an empty interval is the identity") {
  auto c = fixtures::driven();
  const Vector2cd phi(0.3, Complex<double>(0.1, 0.9));
  const PropagationResult r = propagate(phi, 1.2, 1.2, 1.0, c.physics, c.drive, Direction::forward);
  CHECK(r.state == phi);
  CHECK(r.survival == 1.0);
}

TEST_CASE("free evolution accumulates the relative phase") {
  auto c = fixtures::undriven(0.0);
  const double tau = 2.3;
  const PropagationResult r = propagate(plus_state(), 0.0, tau, 1.0, c.physics, c.drive, Direction::forward);
  CHECK(std::norm(r.state(0)) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::norm(r.state(1)) == doctest::Approx(0.5).epsilon(1e-10));
  const Complex<double> rel = r.state(1) / r.state(0);
  CHECK(std::abs(rel - std::exp(-I * tau)) < 1e-9);
}

TEST_CASE("zero-temperature survival is exponential") {
  auto c = fixtures::zero_temperature(0.7);
  for (double tau : {0.5, 1.0, 3.0}) {
    const PropagationResult r =
        propagate(basis_state<double>(Level::up), 0.0, tau, 0.0, c.physics, c.drive, Direction::forward);
    CHECK(std::abs(r.survival - std::exp(-0.7 * tau)) < 1e-8);
  }
}

TEST_CASE("adjoint relation between forward and reversed semigroups") {
  auto closed = fixtures::driven(0.0);
  CHECK(reversed_adjoint_check(0.3, 3.1, 1.0, closed.physics, closed.drive) < 1e-10);
  auto open = fixtures::driven(0.8, 0.9);
  Tolerances tol;
  CHECK(reversed_adjoint_check(0.2, 2.9, 0.9, open.physics, open.drive, tol) < 10 * tol.rel);
  CHECK(reversed_adjoint_check(1.0, 1.0, 0.9, open.physics, open.drive) == 0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int k = 0; k < 10; ++k) {
    double s = u(rng), t = u(rng);
    if (s > t) std::swap(s, t);
    CHECK(reversed_adjoint_check(s, t, 0.5 + 0.1 * k, open.physics, open.drive, tol) < 10 * tol.rel);
  }
}

TEST_CASE("semigroup composition and monotone survival") {
  auto c = fixtures::driven(0.6, 0.8);
  Tolerances tol;
  const Matrix2cd full = propagator_matrix(0.4, 3.3, 0.8, c.physics, c.drive, Direction::forward, tol);
  for (double r : {0.9, 1.7, 2.8}) {
    const Matrix2cd a = propagator_matrix(0.4, r, 0.8, c.physics, c.drive, Direction::forward, tol);
    const Matrix2cd b = propagator_matrix(r, 3.3, 0.8, c.physics, c.drive, Direction::forward, tol);
    CHECK((full - b * a).norm() < 10 * tol.rel);
  }
  double prev = 1.0;
  const Vector2cd phi = plus_state();
  for (double t = 0.5; t <= 4.0; t += 0.5) {
    const double s = propagate(phi, 0.0, t, 0.8, c.physics, c.drive, Direction::forward).survival;
    CHECK(s <= prev);
    prev = s;
  }
}

TEST_CASE("propagator agrees with a fine RK4 reference") {
  auto c = fixtures::driven(0.5, 1.0);
  const Vector2cd phi0(0.6, Complex<double>(0, 0.8));
  const PropagationResult r = propagate(phi0, 0.5, 3.5, 1.0, c.physics, c.drive, Direction::forward);
  ref::Vec psi = phi0;
  const int n = 30000;
  const double h = 3.0 / n;
  auto rhs = [&](double t, const ref::Vec& v) {
    return ref::Vec(-ref::I * (ref::generator(1.0, c.drive.lambda(t), 0.5, 1.0) * v));
  };
  double t = 0.5;
  for (int k = 0; k < n; ++k) {
    const ref::Vec k1 = rhs(t, psi);
    const ref::Vec k2 = rhs(t + h / 2, psi + h / 2 * k1);
    const ref::Vec k3 = rhs(t + h / 2, psi + h / 2 * k2);
    const ref::Vec k4 = rhs(t + h, psi + h * k3);
    psi += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  CHECK((r.state - psi).norm() < 1e-9);
}
