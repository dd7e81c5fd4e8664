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

#include "qcal/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "qcal/config_io.hpp"
#include "qcal/dormand_prince.hpp"
#include "qcal/errors.hpp"
#include "qcal/propagator.hpp"

namespace qcal {

namespace {

// [Re phi0, Im phi0, Re phi1, Im phi1, work, T^2]
using Packed = VectorN<double, 6>;

struct AugmentedSystem {
  const SimConfig& config;
  Direction direction;
  double temperature;  // frozen value when the drift is off
  bool drift;
  double drift_coefficient;
  double phonon_power;

  double temperature_at(const Packed& y) const {
    return drift ? std::sqrt(std::max(y(5), 0.0)) : temperature;
  }

  Packed operator()(double t, const Packed& y) const {
    const double T = temperature_at(y);
    const Matrix2cd g =
        generator_matrix(t, T, config.physics, config.drive, direction);
    const Vector2cd phi = unpack_state(y);
    Packed out;
    pack_state(Vector2cd(Complex<double>(0, -1) * (g * phi)), out);
    out(4) = 0;
    if (direction == Direction::forward) {
      const double dl = config.drive.dlambda_dt(t);
      if (dl != 0) {
        // <phi| (i a - i a*) |phi> = -2 Im(conj(phi0) phi1)
        const double x = -2.0 * std::imag(std::conj(phi(0)) * phi(1));
        out(4) = dl * x / phi.squaredNorm();
      }
    }
    out(5) = drift ? drift_coefficient *
                         (phonon_power -
                          std::pow(T, config.phonon.exponent))
                   : 0.0;
    return out;
  }
};

class Sampler {
 public:
  Sampler(const SimConfig& config, Direction direction, Rng& rng)
      : config_(config),
        direction_(direction),
        rng_(rng),
        tol_{config.numerics.rel_tol, config.numerics.abs_tol},
        drift_(direction == Direction::forward && config.phonon.enabled &&
               config.phonon.sigma_ep > 0 && config.physics.kappa > 0) {
    const int n = config.numerics.checkpoints;
    for (int k = 1; k <= n; ++k)
      checkpoint_times_.push_back(k == n ? config.t_f()
                                         : config.t_i() + k *
                                               config.drive.duration() / n);
  }

  struct SegmentEnd {
    bool jumped{false};
    double time{};
    Vector2cd state;  // normalized
    double temperature{};
    double work{};
  };

  SegmentEnd evolve(double t, double t_end, const Vector2cd& state, double T,
                    double target, std::vector<Checkpoint>* checkpoints) {
    AugmentedSystem sys{config_,
                        direction_,
                        T,
                        drift_,
                        config_.physics.kappa * config_.phonon.sigma_ep,
                        std::pow(config_.phonon.T_p, config_.phonon.exponent)};
    Packed y;
    pack_state(state, y);
    y(4) = 0;
    y(5) = T * T;

    SegmentEnd end;
    if (!(t < t_end)) {
      end.time = t;
      end.state = state;
      end.temperature = T;
      return end;
    }
    DormandPrince<double, 6> stepper(tol_);
    stepper.initialize(sys, t, y, t_end);
    const double time_tol =
        config_.numerics.jump_time_tol * config_.drive.duration();
    while (stepper.t() < t_end) {
      stepper.step(sys, t_end);
      double stop = stepper.t();
      Packed at_stop = stepper.y();
      if (packed_norm2(at_stop) <= target) {
        double lo = stepper.t_prev();
        double hi = stepper.t();
        while (hi - lo > time_tol) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (packed_norm2(stepper.dense(mid)) > target)
            lo = mid;
          else
            hi = mid;
        }
        stop = hi;
        at_stop = stepper.dense(stop);
        end.jumped = true;
      }
      if (checkpoints) record_checkpoints(stepper, sys, stop, *checkpoints);
      if (end.jumped) {
        end.time = stop;
        end.state = unpack_state(at_stop).normalized();
        end.temperature = sys.temperature_at(at_stop);
        end.work = at_stop(4);
        return end;
      }
    }
    end.time = t_end;
    end.state = unpack_state(stepper.y()).normalized();
    end.temperature = sys.temperature_at(stepper.y());
    end.work = stepper.y()(4);
    return end;
  }

  /// Draws the direction of a jump at `time` and applies it.
  JumpRecord jump(double time, Vector2cd& state, double T) {
    const double tp = physical_time(time, config_.drive, direction_);
    const EigenFrame frame = eigenframe_from_drive(config_.physics.omega0,
                                                   config_.drive.lambda(tp));
    const RatePair r = rates(frame.omega, T, config_.physics);
    const double emit = r.up * (frame.lower * state).squaredNorm();
    const double absorb = r.down * (frame.raise * state).squaredNorm();
    const int x = uniform01(rng_) * (emit + absorb) < emit ? 1 : -1;
    state = apply_jump(state, frame, x);
    JumpRecord rec;
    rec.time = time;
    rec.x = x;
    rec.gap = frame.omega;
    rec.temp_before = T;
    rec.temp_after = temperature_after_jump(T, frame.omega, x, config_.physics);
    rec.rate = r.of(x);
    return rec;
  }

  Trajectory run(std::uint64_t seed) {
    Trajectory traj;
    traj.seed = seed;
    traj.direction = direction_;
    const Distribution prep = direction_ == Direction::forward
                                  ? config_.measurement.initial
                                  : config_.reversed_initial();
    traj.initial_label = uniform01(rng_) < prep.up ? Level::up : Level::down;

    Vector2cd state = basis_state(traj.initial_label);
    double T = config_.physics.T0;
    double t = config_.t_i();
    const double t_f = config_.t_f();
    next_checkpoint_ = 0;
    while (true) {
      const double target = uniform01(rng_);
      const SegmentEnd end = evolve(t, t_f, state, T, target, &traj.checkpoints);
      traj.segments.push_back({t, end.time, end.work});
      state = end.state;
      T = end.temperature;
      t = end.time;
      if (!end.jumped) break;
      JumpRecord rec = jump(t, state, T);
      T = rec.temp_after;
      traj.jumps.push_back(rec);
    }
    traj.final_state = state;
    traj.final_temperature = T;
    traj.final_label =
        uniform01(rng_) < std::norm(state(1)) ? Level::up : Level::down;
    return traj;
  }

 private:
  void record_checkpoints(const DormandPrince<double, 6>& stepper,
                          const AugmentedSystem& sys, double stop,
                          std::vector<Checkpoint>& out) {
    while (next_checkpoint_ < checkpoint_times_.size() &&
           checkpoint_times_[next_checkpoint_] <= stop) {
      const double c = checkpoint_times_[next_checkpoint_];
      const Packed y = c == stepper.t() ? stepper.y() : stepper.dense(c);
      out.push_back({c, unpack_state(y).normalized(), sys.temperature_at(y)});
      ++next_checkpoint_;
    }
  }

  const SimConfig& config_;
  Direction direction_;
  Rng& rng_;
  Tolerances tol_;
  bool drift_;
  std::vector<double> checkpoint_times_;
  std::size_t next_checkpoint_{0};
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string failure_kind(const std::exception& e) {
  if (dynamic_cast<const CalorimeterExhausted*>(&e))
    return "calorimeter-exhausted";
  if (dynamic_cast<const IntegrationFailure*>(&e)) return "integration-failure";
  if (dynamic_cast<const DomainError*>(&e)) return "domain-error";
  return "error";
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(~index));
}

Vector2cd apply_jump(const Vector2cd& state, const EigenFrame& frame, int x) {
  if (x != 1 && x != -1) throw std::logic_error("jump direction must be +-1");
  const Vector2cd out = (x > 0 ? frame.lower : frame.raise) * state;
  const double n = out.norm();
  if (!(n > 0))
    throw std::logic_error("zero-amplitude jump: the operator annihilates the state");
  return out / n;
}

Trajectory sample_trajectory(const SimConfig& config, std::uint64_t seed,
                             Direction direction) {
  Rng rng(seed);
  Sampler sampler(config, direction, rng);
  return sampler.run(seed);
}

Trajectory sample_trajectory(const SimConfig& config, std::uint64_t seed) {
  return sample_trajectory(config, seed, Direction::forward);
}

Trajectory sample_reversed_trajectory(const SimConfig& config,
                                      std::uint64_t seed) {
  return sample_trajectory(config, seed, Direction::reversed);
}

std::optional<WindowJump> sample_first_jump(const SimConfig& config,
                                            Direction direction, double t,
                                            double t_end,
                                            const Vector2cd& state, double T,
                                            Rng& rng) {
  Sampler sampler(config, direction, rng);
  const auto end = sampler.evolve(t, t_end, state.normalized(), T,
                                  uniform01(rng), nullptr);
  if (!end.jumped) return std::nullopt;
  Vector2cd s = end.state;
  const JumpRecord rec = sampler.jump(end.time, s, end.temperature);
  return WindowJump{rec.time, rec.x, rec.gap, rec.temp_before};
}

double evolve_temperature_drift(double T, double dt, const PhononParams& phonon,
                                const PhysicalParams& params, double rel_tol) {
  if (!(T > 0)) throw DomainError("temperature must be > 0");
  if (!(dt >= 0)) throw DomainError("duration must be >= 0");
  if (!phonon.enabled || phonon.sigma_ep == 0 || params.kappa == 0 || dt == 0)
    return T;
  const double coefficient = params.kappa * phonon.sigma_ep;
  const double target = std::pow(phonon.T_p, phonon.exponent);
  const int n = phonon.exponent;
  auto rhs = [&](double, const VectorN<double, 1>& u) {
    VectorN<double, 1> du;
    du(0) = coefficient *
            (target - std::pow(std::sqrt(std::max(u(0), 0.0)), n));
    return du;
  };
  VectorN<double, 1> u;
  u(0) = T * T;
  Tolerances tol;
  tol.rel = rel_tol;
  tol.abs = rel_tol * 1e-6 * T * T;
  u = integrate(rhs, 0.0, dt, u, tol);
  return std::sqrt(u(0));
}

TrajectorySet run_ensemble(const SimConfig& config, std::uint64_t n,
                           std::uint64_t base_seed,
                           const EnsembleOptions& options) {
  if (n < 1) throw ValidationError("ensemble size must be >= 1");
  if (options.workers < 1) throw ValidationError("workers must be >= 1");

  std::vector<std::optional<Trajectory>> slots(n);
  std::vector<std::optional<TrajectoryFailure>> failed(n);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::uint64_t first_error_index = n;
  std::mutex error_mutex;

  auto work = [&]() {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      const std::uint64_t seed = derive_seed(base_seed, i);
      try {
        slots[i] = sample_trajectory(config, seed, options.direction);
      } catch (const std::exception& e) {
        failed[i] = TrajectoryFailure{i, seed, failure_kind(e), e.what()};
        if (options.fail_fast) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (i < first_error_index) {
            first_error_index = i;
            first_error = std::current_exception();
          }
          stop = true;
        }
      }
    }
  };

  const auto workers = static_cast<std::uint64_t>(options.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < std::min(workers, n); ++w)
      pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  TrajectorySet set;
  set.config_digest = config_digest(config);
  set.direction = options.direction;
  set.base_seed = base_seed;
  set.trajectories.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (slots[i]) set.trajectories.push_back(std::move(*slots[i]));
    if (failed[i]) set.failures.push_back(std::move(*failed[i]));
  }
  return set;
}

}  // namespace qcal
