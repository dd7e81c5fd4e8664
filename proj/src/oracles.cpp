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

#include "qcal/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcal/errors.hpp"
#include "qcal/physics_model.hpp"
#include "qcal/propagator.hpp"

namespace qcal {

namespace {

constexpr Complex<double> kI(0, 1);

/// Probability below which a path is treated as impossible in the pathwise
/// fluctuation-relation comparison.
constexpr double kNegligibleProbability = 1e-300;
constexpr double kRoundoffRatio = 1e-13;

/// Largest eigenvalue of m^dag m.
double spectral_norm2(const Matrix2cd& m) {
  const Matrix2cd h = m.adjoint() * m;
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  return 0.5 * (a + d + std::hypot(a - d, 2 * std::abs(h(0, 1))));
}

void require_steps(int n_steps, int limit) {
  if (n_steps < 1 || n_steps > limit) {
    std::ostringstream os;
    os << "enumeration with " << n_steps << " steps is outside [1, " << limit
       << "]";
    throw CombinatorialLimit(os.str());
  }
}

struct LeafVisitor {
  virtual ~LeafVisitor() = default;
  virtual void leaf(Level initial, double prep_probability, const Vector2cd& phi,
                    double J, const std::vector<std::int8_t>& steps,
                    const std::vector<double>& temps) = 0;
};

class Enumerator {
 public:
  Enumerator(const SimConfig& config, int n_steps)
      : config_(config),
        params_(config.physics),
        drive_(config.drive),
        n_(n_steps),
        dt_(config.drive.duration() / n_steps),
        steps_(n_steps),
        temps_(n_steps + 1) {
    validate(config);
    for (int j = 0; j <= n_; ++j) {
      times_.push_back(j == n_ ? drive_.t_f() : drive_.t_i() + j * dt_);
      frames_.push_back(
          eigenframe_from_drive(params_.omega0, drive_.lambda(times_.back())));
    }
  }

  double dt() const { return dt_; }
  double max_rate() const { return max_rate_; }
  double max_generator_norm2() const { return max_gnorm2_; }

  void run(LeafVisitor& visitor) {
    visitor_ = &visitor;
    for (Level initial : {Level::down, Level::up}) {
      const double p = config_.measurement.initial.of(initial);
      if (!(p > 0)) continue;
      initial_ = initial;
      prep_ = p;
      temps_[0] = params_.T0;
      descend(0, basis_state(initial), params_.T0, 0.0);
    }
  }

  /// Conditional probability of the time-reversed path from `final` to
  /// `initial` under the chosen reversed kernel.
  double reversed_probability(Level initial, Level final,
                              const std::vector<std::int8_t>& steps,
                              const std::vector<double>& temps,
                              ReversedKernel kernel) const {
    Vector2cd v = basis_state(final);
    double T = temps[n_];
    for (int k = 0; k < n_; ++k) {
      const int j = n_ - 1 - k;
      const int outcome = -steps[j];
      // Physical time at which the reversed step is evaluated.
      const int phys = kernel == ReversedKernel::exact_adjoint ? j : n_ - k;
      const double s = drive_.mirror(times_[phys]);
      const EigenFrame& frame = frames_[phys];
      if (outcome == 0) {
        const Matrix2cd g =
            generator_matrix(s, T, params_, drive_, Direction::reversed);
        v = (v - kI * dt_ * (g * v)).eval();
        continue;
      }
      const RatePair r = rates(frame.omega, T, params_);
      const Matrix2cd& op = outcome > 0 ? frame.lower : frame.raise;
      v = (std::sqrt(r.of(outcome) * dt_) * (op * v)).eval();
      if (v.squaredNorm() == 0) return 0.0;
      T = temperature_after_jump(T, frame.omega, outcome, params_);
    }
    (void)temps;
    return std::norm(v(index_of(initial)));
  }

 private:
  void descend(int j, const Vector2cd& phi, double T, double J) {
    if (j == n_) {
      visitor_->leaf(initial_, prep_, phi, J, steps_, temps_);
      return;
    }
    const EigenFrame& frame = frames_[j];
    const Matrix2cd g =
        generator_matrix(times_[j], T, params_, drive_, Direction::forward);
    const RatePair r = rates(frame.omega, T, params_);
    max_rate_ = std::max(max_rate_, r.up);
    max_gnorm2_ = std::max(max_gnorm2_, spectral_norm2(g));

    steps_[j] = 0;
    temps_[j + 1] = T;
    descend(j + 1, phi - kI * dt_ * (g * phi), T, J);

    for (int x : {1, -1}) {
      const Matrix2cd& op = x > 0 ? frame.lower : frame.raise;
      const double rate = r.of(x);
      // A jump that leaves only round-off of the state (a_t a_t at equal
      // frames) is a structural zero; keeping the residue would make the
      // pathwise ratio meaningless.
      Vector2cd projected = op * phi;
      if (projected.squaredNorm() <=
          kRoundoffRatio * kRoundoffRatio * phi.squaredNorm())
        projected.setZero();
      const Vector2cd child = std::sqrt(rate * dt_) * projected;
      const bool possible = child.squaredNorm() > 0;
      double T_after = T;
      double dJ = std::numeric_limits<double>::quiet_NaN();
      if (possible) {
        T_after = temperature_after_jump(T, frame.omega, x, params_);
        const RatePair before = log_rates(frame.omega, T, params_);
        const RatePair after = log_rates(frame.omega, T_after, params_);
        dJ = before.of(x) - after.of(-x);
      } else {
        try {
          T_after = temperature_after_jump(T, frame.omega, x, params_);
        } catch (const CalorimeterExhausted&) {
          T_after = T;  // unreachable branch, probability zero
        }
      }
      steps_[j] = static_cast<std::int8_t>(x);
      temps_[j + 1] = T_after;
      descend(j + 1, child, T_after, J + dJ);
    }
  }

  const SimConfig& config_;
  const PhysicalParams& params_;
  const DriveProtocol& drive_;
  int n_;
  double dt_;
  std::vector<double> times_;
  std::vector<EigenFrame> frames_;
  std::vector<std::int8_t> steps_;
  std::vector<double> temps_;
  LeafVisitor* visitor_{nullptr};
  Level initial_{Level::down};
  double prep_{0};
  double max_rate_{0};
  double max_gnorm2_{0};
};

class SummaryVisitor : public LeafVisitor {
 public:
  SummaryVisitor(const Enumerator& e, int n_steps, bool check_fr,
                 ReversedKernel kernel)
      : enumerator_(e), check_fr_(check_fr), kernel_(kernel) {
    jump_counts.assign(n_steps + 1, 0.0);
  }

  void leaf(Level initial, double prep, const Vector2cd& phi, double J,
            const std::vector<std::int8_t>& steps,
            const std::vector<double>& temps) override {
    int jumps = 0;
    for (auto s : steps) jumps += s != 0;
    for (Level final : {Level::down, Level::up}) {
      ++path_count;
      const double p_cond = std::norm(phi(index_of(final)));
      const double prob = prep * p_cond;
      total += prob;
      marginal[index_of(final)] += prob;
      jump_counts[jumps] += prob;
      if (!(prob > 0)) continue;
      weighted[index_of(final)] += p_cond * std::exp(-J);
      sigma_partial += prob * (std::log(prep) + J);
      if (check_fr_ && p_cond > kNegligibleProbability) {
        const double p_rev = enumerator_.reversed_probability(
            initial, final, steps, temps, kernel_);
        const double dev =
            p_rev > 0 ? std::abs(std::expm1(std::log(p_cond) -
                                            std::log(p_rev) - J))
                      : std::numeric_limits<double>::infinity();
        max_deviation = std::max(max_deviation, dev);
      }
    }
  }

  std::uint64_t path_count{0};
  double total{0};
  double marginal[2]{0, 0};
  double weighted[2]{0, 0};
  double sigma_partial{0};
  double max_deviation{0};
  std::vector<double> jump_counts;

 private:
  const Enumerator& enumerator_;
  bool check_fr_;
  ReversedKernel kernel_;
};

class ListVisitor : public LeafVisitor {
 public:
  void leaf(Level initial, double prep, const Vector2cd& phi, double J,
            const std::vector<std::int8_t>& steps,
            const std::vector<double>&) override {
    for (Level final : {Level::down, Level::up}) {
      DiscretePath path;
      path.initial = initial;
      path.final = final;
      path.steps = steps;
      path.probability = prep * std::norm(phi(index_of(final)));
      path.J = J;
      paths.push_back(std::move(path));
    }
  }

  std::vector<DiscretePath> paths;
};

Distribution normalized_marginal(const double m[2]) {
  const double sum = m[0] + m[1];
  return {m[1] / sum, m[0] / sum};
}

/// Neville evaluation at x = 0 of the polynomial through (xs, ys).
double extrapolate_to_zero(std::vector<double> xs, std::vector<double> ys) {
  const std::size_t n = xs.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      ys[i] = (xs[i + level] * ys[i] - xs[i] * ys[i + 1]) /
              (xs[i + level] - xs[i]);
    }
  }
  return ys[0];
}

// Lindblad right-hand side on a 2x2 block.
Matrix2cd dissipator(const Matrix2cd& rho, const EigenFrame& frame,
                     const RatePair& r) {
  const Matrix2cd& a = frame.lower;
  const Matrix2cd& ad = frame.raise;
  const Matrix2cd ne = frame.excited_projector();
  const Matrix2cd ng = frame.ground_projector();
  return r.up * (a * rho * ad - 0.5 * (ne * rho + rho * ne)) +
         r.down * (ad * rho * a - 0.5 * (ng * rho + rho * ng));
}

void pack_block(const Matrix2cd& m, Eigen::Ref<Eigen::VectorXd> out) {
  for (int k = 0; k < 4; ++k) {
    out(2 * k) = m(k % 2, k / 2).real();
    out(2 * k + 1) = m(k % 2, k / 2).imag();
  }
}

Matrix2cd unpack_block(const Eigen::Ref<const Eigen::VectorXd>& in) {
  Matrix2cd m;
  for (int k = 0; k < 4; ++k)
    m(k % 2, k / 2) = Complex<double>(in(2 * k), in(2 * k + 1));
  return m;
}

void require_fixed_temperature(const SimConfig& config) {
  if (config.physics.kappa != 0)
    throw DomainError("fixed-temperature Lindblad oracle requires kappa = 0");
}

void require_undriven(const SimConfig& config) {
  if (!config.drive.is_undriven())
    throw DomainError(
        "the temperature lattice oracle requires an undriven protocol");
}

/// Lattice dynamics on levels [m_min, m_min + L). Trailing two entries of the
/// state accumulate the weight leaving the window below and above.
struct LatticeSystem {
  const SimConfig& config;
  int m_min;
  int levels;
  std::vector<RatePair> level_rates;
  std::vector<bool> level_exists;
  EigenFrame frame;
  Matrix2cd h;

  LatticeSystem(const SimConfig& c, int m_min_, int levels_)
      : config(c), m_min(m_min_), levels(levels_) {
    const PhysicalParams& p = c.physics;
    frame = eigenframe_from_drive(p.omega0, 0.0);
    h = hamiltonian_matrix(p.omega0, 0.0);
    level_rates.resize(levels + 2);
    level_exists.resize(levels + 2);
    // Index 0 and levels + 1 are the neighbours just outside the window.
    for (int k = 0; k < levels + 2; ++k) {
      const int m = m_min - 1 + k;
      const double T2 = p.T0 * p.T0 + m * p.kappa * p.omega0;
      level_exists[k] = T2 > 0 || (p.emission_only && T2 >= 0);
      level_rates[k] = level_exists[k]
                           ? rates(p.omega0, std::sqrt(std::max(T2, 0.0)), p)
                           : RatePair{0, 0};
    }
  }

  Eigen::VectorXd operator()(double, const Eigen::VectorXd& y) const {
    Eigen::VectorXd dy = Eigen::VectorXd::Zero(y.size());
    const Matrix2cd& a = frame.lower;
    const Matrix2cd& ad = frame.raise;
    const Matrix2cd ne = frame.excited_projector();
    const Matrix2cd ng = frame.ground_projector();
    for (int k = 0; k < levels; ++k) {
      const Matrix2cd rho = unpack_block(y.segment(8 * k, 8));
      const RatePair& r = level_rates[k + 1];
      Matrix2cd d = -kI * (h * rho - rho * h) -
                    0.5 * r.up * (ne * rho + rho * ne) -
                    0.5 * r.down * (ng * rho + rho * ng);
      if (k > 0) {
        const Matrix2cd below = unpack_block(y.segment(8 * (k - 1), 8));
        d += level_rates[k].up * (a * below * ad);
      }
      if (k + 1 < levels) {
        const Matrix2cd above = unpack_block(y.segment(8 * (k + 1), 8));
        d += level_rates[k + 2].down * (ad * above * a);
      }
      pack_block(d, dy.segment(8 * k, 8));
    }
    const Matrix2cd lowest = unpack_block(y.segment(0, 8));
    const Matrix2cd highest = unpack_block(y.segment(8 * (levels - 1), 8));
    dy(8 * levels) = level_rates[1].down * std::real((ad * lowest * a).trace());
    dy(8 * levels + 1) =
        level_rates[levels].up * std::real((a * highest * ad).trace());
    return dy;
  }
};

/// Lowest level with a positive squared temperature.
int physical_floor(const PhysicalParams& p) {
  if (p.kappa == 0) return std::numeric_limits<int>::min() / 4;
  const double step = p.kappa * p.omega0;
  int m = -static_cast<int>(std::floor(p.T0 * p.T0 / step));
  while (p.T0 * p.T0 + m * step <= 0) ++m;
  return m;
}

}  // namespace

int DiscretePath::jump_count() const {
  return static_cast<int>(
      std::count_if(steps.begin(), steps.end(), [](auto s) { return s != 0; }));
}

std::vector<DiscretePath> enumerate_paths(
    const SimConfig& config, int n_steps,
    std::optional<Distribution> final_reference) {
  require_steps(n_steps, kMaxListedSteps);
  Enumerator enumerator(config, n_steps);
  ListVisitor visitor;
  enumerator.run(visitor);
  Distribution reference;
  if (final_reference) {
    reference = *final_reference;
  } else {
    double m[2] = {0, 0};
    for (const auto& p : visitor.paths) m[index_of(p.final)] += p.probability;
    reference = normalized_marginal(m);
  }
  for (auto& p : visitor.paths) {
    const double pf = reference.of(p.final);
    p.sigma = pf > 0 ? -std::log(pf) +
                           std::log(config.measurement.initial.of(p.initial)) +
                           p.J
                     : std::numeric_limits<double>::infinity();
  }
  return std::move(visitor.paths);
}

EnumerationSummary summarize_enumeration(
    const SimConfig& config, int n_steps, ReversedKernel kernel,
    std::optional<Distribution> final_reference,
    bool check_fluctuation_relation) {
  require_steps(n_steps, kMaxEnumerationSteps);
  Enumerator enumerator(config, n_steps);
  SummaryVisitor visitor(enumerator, n_steps, check_fluctuation_relation,
                         kernel);
  enumerator.run(visitor);

  EnumerationSummary out;
  out.n_steps = n_steps;
  out.dt = enumerator.dt();
  out.path_count = visitor.path_count;
  out.total_probability = visitor.total;
  out.final_marginal = normalized_marginal(visitor.marginal);
  out.final_reference = final_reference.value_or(out.final_marginal);
  out.max_fr_deviation = visitor.max_deviation;
  out.jump_count_distribution = visitor.jump_counts;
  out.max_total_rate = enumerator.max_rate();
  out.max_generator_norm2 = enumerator.max_generator_norm2();
  double mean_exp = 0;
  double sigma = visitor.sigma_partial;
  for (Level f : {Level::down, Level::up}) {
    const double pf = out.final_reference.of(f);
    mean_exp += pf * visitor.weighted[index_of(f)];
    if (visitor.marginal[index_of(f)] > 0)
      sigma -= visitor.marginal[index_of(f)] * std::log(pf);
  }
  out.mean_exp_neg_sigma = mean_exp;
  out.mean_sigma = sigma;
  return out;
}

double per_path_fr_check(const SimConfig& config, int n_steps,
                         ReversedKernel kernel) {
  return summarize_enumeration(config, n_steps, kernel, std::nullopt, true)
      .max_fr_deviation;
}

std::vector<double> extrapolated_jump_counts(const SimConfig& config,
                                             std::span<const int> step_counts) {
  if (step_counts.empty()) return {};
  std::vector<double> dts;
  std::vector<std::vector<double>> laws;
  std::size_t width = 0;
  for (int n : step_counts) {
    const auto summary =
        summarize_enumeration(config, n, ReversedKernel::exact_adjoint,
                              std::nullopt, false);
    dts.push_back(summary.dt);
    laws.push_back(summary.jump_count_distribution);
    width = std::max(width, summary.jump_count_distribution.size());
  }
  std::vector<double> out(width);
  for (std::size_t k = 0; k < width; ++k) {
    std::vector<double> ys;
    for (const auto& law : laws) ys.push_back(k < law.size() ? law[k] : 0.0);
    out[k] = extrapolate_to_zero(dts, ys);
  }
  return out;
}

std::vector<DensityCheckpoint> lindblad_fixed_T(const SimConfig& config,
                                                std::span<const double> times,
                                                const Matrix2cd& rho0,
                                                const Tolerances& tol) {
  require_fixed_temperature(config);
  const PhysicalParams& p = config.physics;
  const DriveProtocol& drive = config.drive;
  auto rhs = [&](double t, const VectorN<double, 8>& y) {
    Matrix2cd rho;
    for (int k = 0; k < 4; ++k)
      rho(k % 2, k / 2) = Complex<double>(y(2 * k), y(2 * k + 1));
    const double lambda = drive.lambda(t);
    const Matrix2cd h = hamiltonian_matrix(p.omega0, lambda);
    const EigenFrame frame = eigenframe_from_drive(p.omega0, lambda);
    const Matrix2cd d = -kI * (h * rho - rho * h) +
                        dissipator(rho, frame, rates(frame.omega, p.T0, p));
    VectorN<double, 8> dy;
    for (int k = 0; k < 4; ++k) {
      dy(2 * k) = d(k % 2, k / 2).real();
      dy(2 * k + 1) = d(k % 2, k / 2).imag();
    }
    return dy;
  };
  VectorN<double, 8> y;
  for (int k = 0; k < 4; ++k) {
    y(2 * k) = rho0(k % 2, k / 2).real();
    y(2 * k + 1) = rho0(k % 2, k / 2).imag();
  }
  std::vector<DensityCheckpoint> out;
  double t = drive.t_i();
  for (double target : times) {
    if (!drive.contains(target) || target < t)
      throw DomainError("checkpoint times must be ascending within the horizon");
    if (target > t) y = integrate(rhs, t, target, y, tol);
    t = target;
    DensityCheckpoint cp;
    cp.time = target;
    for (int k = 0; k < 4; ++k)
      cp.rho(k % 2, k / 2) = Complex<double>(y(2 * k), y(2 * k + 1));
    out.push_back(cp);
  }
  return out;
}

std::vector<DensityCheckpoint> lindblad_fixed_T(const SimConfig& config,
                                                std::span<const double> times,
                                                const Tolerances& tol) {
  Matrix2cd rho0 = Matrix2cd::Zero();
  rho0(0, 0) = config.measurement.initial.down;
  rho0(1, 1) = config.measurement.initial.up;
  return lindblad_fixed_T(config, times, rho0, tol);
}

Distribution lindblad_final_marginal(const SimConfig& config,
                                     const Tolerances& tol) {
  const double t_f = config.t_f();
  const auto series = lindblad_fixed_T(config, std::span(&t_f, 1), tol);
  const Matrix2cd& rho = series.back().rho;
  const double up = std::real(rho(1, 1));
  const double down = std::real(rho(0, 0));
  return {up / (up + down), down / (up + down)};
}

double TemperatureLattice::temperature(int m) const {
  return std::sqrt(base_T2 + m * spacing);
}

double TemperatureLattice::trace() const {
  double sum = 0;
  for (const auto& b : blocks) sum += std::real(b.trace());
  return sum;
}

Matrix2cd TemperatureLattice::marginal() const {
  Matrix2cd sum = Matrix2cd::Zero();
  for (const auto& b : blocks) sum += b;
  return sum;
}

double TemperatureLattice::weight(Level label, int m) const {
  if (m < m_min || m > m_max()) return 0.0;
  return std::real(block(m)(index_of(label), index_of(label)));
}

std::vector<TemperatureLattice> joint_master_equation(
    const SimConfig& config, std::span<const double> times,
    const Matrix2cd& rho0, const Tolerances& tol) {
  require_undriven(config);
  validate(config.physics);
  const PhysicalParams& p = config.physics;
  constexpr double kLeakTolerance = 1e-12;
  const int floor = physical_floor(p);
  int half_width = 4;
  for (;;) {
    const int m_min = std::max(-half_width, floor);
    const int m_max = half_width;
    const int levels = m_max - m_min + 1;
    LatticeSystem sys(config, m_min, levels);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(8 * levels + 2);
    pack_block(rho0, y.segment(8 * (0 - m_min), 8));

    std::vector<TemperatureLattice> out;
    double t = config.t_i();
    bool leaked = false;
    for (double target : times) {
      if (!config.drive.contains(target) || target < t)
        throw DomainError(
            "snapshot times must be ascending within the horizon");
      if (target > t) y = integrate(sys, t, target, y, tol);
      t = target;
      const double leak_low = y(8 * levels);
      const double leak_high = y(8 * levels + 1);
      if (leak_low > kLeakTolerance && m_min == floor) {
        std::ostringstream os;
        os << "calorimeter exhausted: weight " << leak_low
           << " absorbed below T^2 = 0";
        throw LatticeBoundsError(os.str());
      }
      if (leak_low > kLeakTolerance || leak_high > kLeakTolerance) {
        leaked = true;
        break;
      }
      TemperatureLattice lat;
      lat.base_T2 = p.T0 * p.T0;
      lat.spacing = p.kappa * p.omega0;
      lat.m_min = m_min;
      lat.time = target;
      for (int k = 0; k < levels; ++k)
        lat.blocks.push_back(unpack_block(y.segment(8 * k, 8)));
      out.push_back(std::move(lat));
    }
    if (!leaked) return out;
    if (half_width > 4096)
      throw LatticeBoundsError("temperature lattice exceeded 8193 levels");
    half_width *= 2;
  }
}

double master_equation_residual(const SimConfig& config,
                                const TemperatureLattice& lattice) {
  require_undriven(config);
  const int levels = static_cast<int>(lattice.blocks.size());
  LatticeSystem sys(config, lattice.m_min, levels);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(8 * levels + 2);
  for (int k = 0; k < levels; ++k)
    pack_block(lattice.blocks[k], y.segment(8 * k, 8));
  const Eigen::VectorXd dy = sys(config.t_i(), y);
  return dy.head(8 * levels).cwiseAbs().maxCoeff();
}

TemperatureLattice two_state_fixed_point(const SimConfig& config,
                                         Level initial) {
  require_undriven(config);
  const PhysicalParams& p = config.physics;
  // (up, m_lo) <-> (down, m_lo + 1)
  const int m_lo = initial == Level::up ? 0 : -1;
  TemperatureLattice lat;
  lat.base_T2 = p.T0 * p.T0;
  lat.spacing = p.kappa * p.omega0;
  lat.m_min = m_lo;
  lat.time = std::numeric_limits<double>::infinity();
  const double T_lo = std::sqrt(lat.base_T2 + m_lo * lat.spacing);
  const double T_hi = std::sqrt(lat.base_T2 + (m_lo + 1) * lat.spacing);
  const double emit = rates(p.omega0, T_lo, p).up;
  const double absorb = rates(p.omega0, T_hi, p).down;
  lat.blocks.assign(2, Matrix2cd::Zero());
  lat.blocks[0](1, 1) = absorb / (emit + absorb);
  lat.blocks[1](0, 0) = emit / (emit + absorb);
  return lat;
}

}  // namespace qcal
