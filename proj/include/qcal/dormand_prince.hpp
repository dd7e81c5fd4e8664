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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Core>

#include "qcal/errors.hpp"

namespace qcal {

struct Tolerances {
  double rel{1e-10};
  double abs{1e-12};
  /// First trial step; 0 selects it automatically.
  double initial_step{0};
  std::size_t max_steps{50'000'000};
};

/// Embedded Dormand-Prince 5(4) integrator with the 4th-order continuous
/// extension, for real state vectors y' = f(t, y).
///
/// The stepper never steps past the requested end time, so right-hand sides
/// are only evaluated on [t0, t_end]. After each accepted step, dense() gives
/// the interpolated state anywhere on the last step.
template <typename Scalar, int Dim>
class DormandPrince {
 public:
  using State = Eigen::Matrix<Scalar, Dim, 1>;

  explicit DormandPrince(const Tolerances& tol = {}) : tol_(tol) {}

  template <typename Rhs>
  void initialize(const Rhs& f, Scalar t0, const State& y0, Scalar t_end) {
    t_ = t_prev_ = t0;
    y_ = y_prev_ = y0;
    k1_ = f(t0, y0);
    ++rhs_evals_;
    h_ = tol_.initial_step > 0 ? Scalar(tol_.initial_step)
                               : initial_step(f, t_end);
    accepted_ = rejected_ = 0;
  }

  /// Advances by one accepted step that ends at or before t_end.
  template <typename Rhs>
  void step(const Rhs& f, Scalar t_end) {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    const Scalar span = t_end - t_;
    if (!(span > 0)) return;
    for (;;) {
      const bool clipped = h_ >= span;
      const Scalar h = clipped ? span : h_;
      const Scalar underflow =
          Scalar(64) * std::numeric_limits<Scalar>::epsilon() *
          max(abs(t_), abs(t_end));
      if (!clipped && h <= underflow)
        throw IntegrationFailure("step size underflow", double(t_), double(h));
      if (accepted_ + rejected_ >= tol_.max_steps)
        throw IntegrationFailure("step budget exhausted", double(t_),
                                 double(h));

      const State k2 = f(t_ + c2 * h, State(y_ + h * (a21 * k1_)));
      const State k3 = f(t_ + c3 * h, State(y_ + h * (a31 * k1_ + a32 * k2)));
      const State k4 =
          f(t_ + c4 * h, State(y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3)));
      const State k5 =
          f(t_ + c5 * h,
            State(y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4)));
      const State k6 =
          f(t_ + h, State(y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 +
                                    a64 * k4 + a65 * k5)));
      const State y_new =
          y_ + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      const State k7 = f(t_ + h, y_new);
      rhs_evals_ += 6;

      const State err = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 +
                             e6 * k6 + e7 * k7);
      const State scale =
          (Scalar(tol_.abs) +
           Scalar(tol_.rel) * y_.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array())
              .matrix();
      const Scalar err_norm =
          std::sqrt((err.array() / scale.array()).square().mean());

      if (err_norm <= Scalar(1)) {
        const State diff = y_new - y_;
        const State bspl = h * k1_ - diff;
        r1_ = y_;
        r2_ = diff;
        r3_ = bspl;
        r4_ = diff - h * k7 - bspl;
        r5_ = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 +
                   d7 * k7);
        t_prev_ = t_;
        y_prev_ = y_;
        h_last_ = h;
        t_ = clipped ? t_end : t_ + h;
        y_ = y_new;
        k1_ = k7;
        ++accepted_;
        const Scalar grow =
            err_norm == 0 ? Scalar(5)
                          : min(Scalar(5), max(Scalar(0.2),
                                               Scalar(0.9) *
                                                   pow(err_norm, -Scalar(0.2))));
        // Keep the unclipped proposal when the end point cut the step short.
        h_ = clipped ? max(h_, h * grow) : h * grow;
        if (last_rejected_) h_ = min(h_, h);
        last_rejected_ = false;
        return;
      }
      ++rejected_;
      last_rejected_ = true;
      h_ = h * max(Scalar(0.2), Scalar(0.9) * pow(err_norm, -Scalar(0.2)));
    }
  }

  /// Interpolated state at t in [t_prev(), t()].
  State dense(Scalar t) const {
    if (t_ == t_prev_) return y_;
    const Scalar theta = (t - t_prev_) / h_last_;
    const Scalar theta1 = Scalar(1) - theta;
    return r1_ + theta * (r2_ + theta1 * (r3_ + theta * (r4_ + theta1 * r5_)));
  }

  Scalar t() const { return t_; }
  Scalar t_prev() const { return t_prev_; }
  const State& y() const { return y_; }
  const State& y_prev() const { return y_prev_; }
  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }
  std::size_t rhs_evaluations() const { return rhs_evals_; }

 private:
  template <typename Rhs>
  Scalar initial_step(const Rhs& f, Scalar t_end) {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    const Scalar span = t_end - t_;
    const State scale =
        (Scalar(tol_.abs) + Scalar(tol_.rel) * y_.cwiseAbs().array()).matrix();
    const Scalar d0 = std::sqrt((y_.array() / scale.array()).square().mean());
    const Scalar d1n = std::sqrt((k1_.array() / scale.array()).square().mean());
    Scalar h0 = (d0 < Scalar(1e-5) || d1n < Scalar(1e-5))
                    ? Scalar(1e-6)
                    : Scalar(0.01) * d0 / d1n;
    if (span > 0) h0 = min(h0, span);
    const State y1 = y_ + h0 * k1_;
    const State f1 = f(t_ + h0, y1);
    ++rhs_evals_;
    const Scalar d2 =
        std::sqrt(((f1 - k1_).array() / scale.array()).square().mean()) / h0;
    const Scalar dmax = max(d1n, d2);
    const Scalar h1 = dmax <= Scalar(1e-15)
                          ? max(Scalar(1e-6), h0 * Scalar(1e-3))
                          : pow(Scalar(0.01) / dmax, Scalar(0.2));
    Scalar h = min(Scalar(100) * h0, h1);
    if (span > 0) h = min(h, span);
    return h;
  }

  static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10,
                          c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;
  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15,
                          a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561,
                          a52 = Scalar(-25360) / 2187,
                          a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                          a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                          a65 = Scalar(-5103) / 18656;
  static constexpr Scalar a71 = Scalar(35) / 384, a73 = Scalar(500) / 1113,
                          a74 = Scalar(125) / 192, a75 = Scalar(-2187) / 6784,
                          a76 = Scalar(11) / 84;
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                          e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                          e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  static constexpr Scalar d1 = Scalar(-12715105075.0) / Scalar(11282082432.0),
                          d3 = Scalar(87487479700.0) / Scalar(32700410799.0),
                          d4 = Scalar(-10690763975.0) / Scalar(1880347072.0),
                          d5 = Scalar(701980252875.0) / Scalar(199316789632.0),
                          d6 = Scalar(-1453857185.0) / Scalar(822651844.0),
                          d7 = Scalar(69997945.0) / Scalar(29380423.0);

  Tolerances tol_;
  Scalar t_{0}, t_prev_{0}, h_{0}, h_last_{0};
  State y_, y_prev_, k1_;
  State r1_, r2_, r3_, r4_, r5_;
  std::size_t accepted_{0}, rejected_{0}, rhs_evals_{0};
  bool last_rejected_{false};
};

/// Integrates y' = f(t, y) from t0 to t1 and returns y(t1).
template <typename Scalar, int Dim, typename Rhs>
Eigen::Matrix<Scalar, Dim, 1> integrate(const Rhs& f, Scalar t0, Scalar t1,
                                        const Eigen::Matrix<Scalar, Dim, 1>& y0,
                                        const Tolerances& tol = {},
                                        std::size_t* steps = nullptr) {
  DormandPrince<Scalar, Dim> stepper(tol);
  stepper.initialize(f, t0, y0, t1);
  while (stepper.t() < t1) stepper.step(f, t1);
  if (steps) *steps = stepper.accepted_steps();
  return stepper.y();
}

}  // namespace qcal
