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

#include "qcal/ensemble.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "qcal/config_io.hpp"
#include "qcal/engine.hpp"
#include "qcal/errors.hpp"
#include "qcal/oracles.hpp"
#include "qcal/path_thermo.hpp"

namespace qcal {

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
  max_ = std::max(max_, x);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
  max_ = std::max(max_, other.max_);
}

double RunningStats::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::std_error() const {
  return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

JackknifeEstimate jackknife_mean(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw DomainError("jackknife needs at least two samples");
  // Two-pass sums keep cancellation small when the mean is large.
  double sum = 0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(n);
  // Leave-one-out means theta_k = (sum - x_k) / (n - 1); their average is the
  // full mean, so the spread is computed about it directly.
  double ss = 0;
  for (double x : samples) {
    const double theta = (sum - x) / static_cast<double>(n - 1);
    ss += (theta - mean) * (theta - mean);
  }
  const double nn = static_cast<double>(n);
  return {mean, std::sqrt((nn - 1) / nn * ss)};
}

namespace {

void require_forward(const TrajectorySet& set, const std::string& digest) {
  if (set.direction != Direction::forward)
    throw MixedEnsembleError("trajectory set is not a forward ensemble");
  if (set.config_digest != digest)
    throw MixedEnsembleError("trajectory set was sampled from config " +
                             set.config_digest + ", expected " + digest);
}

struct Weights {
  std::vector<double> weight;
  std::vector<double> sigma;
};

void append_weights(const TrajectorySet& set, const SimConfig& config,
                    const MeasurementModel& mm, Weights& out) {
  for (const Trajectory& traj : set.trajectories) {
    const double s =
        entropy_production(traj, mm, config.physics, config.drive);
    out.sigma.push_back(s);
    out.weight.push_back(std::exp(-s));
  }
}

FrEstimate finish(const Weights& w, std::uint64_t failed,
                  const std::string& digest, const MeasurementModel& mm) {
  FrEstimate out;
  out.n = w.weight.size();
  out.failed = failed;
  out.config_digest = digest;
  out.final_reference = mm.final;
  if (out.n == 0) return out;
  if (out.n == 1) {
    out.mean_exp_neg_sigma = w.weight[0];
    out.mean_sigma = w.sigma[0];
    out.max_weight = w.weight[0];
    return out;
  }
  const JackknifeEstimate e = jackknife_mean(w.weight);
  const JackknifeEstimate s = jackknife_mean(w.sigma);
  out.mean_exp_neg_sigma = e.mean;
  out.std_error = e.std_error;
  out.mean_sigma = s.mean;
  out.sigma_std_error = s.std_error;
  out.max_weight = *std::max_element(w.weight.begin(), w.weight.end());
  out.passed =
      failed == 0 && std::abs(e.mean - 1.0) <= 3.0 * e.std_error;
  return out;
}

}  // namespace

std::vector<double> exp_neg_sigma(const TrajectorySet& set,
                                  const SimConfig& config,
                                  const MeasurementModel& mm) {
  Weights w;
  append_weights(set, config, mm, w);
  return w.weight;
}

FrEstimate estimate_fr(const TrajectorySet& set, const SimConfig& config,
                       const MeasurementModel& mm) {
  return estimate_fr(std::span(&set, 1), config, mm);
}

FrEstimate estimate_fr(std::span<const TrajectorySet> shards,
                       const SimConfig& config, const MeasurementModel& mm) {
  const std::string digest = config_digest(config);
  Weights w;
  std::uint64_t failed = 0;
  for (const TrajectorySet& set : shards) {
    require_forward(set, digest);
    append_weights(set, config, mm, w);
    failed += set.failures.size();
  }
  return finish(w, failed, digest, mm);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MarginalEstimate empirical_final_marginal(const TrajectorySet& set, double z) {
  MarginalEstimate out;
  out.n = set.size();
  for (const Trajectory& t : set.trajectories)
    (t.final_label == Level::up ? out.count_up : out.count_down) += 1;
  const double denom = static_cast<double>(out.n) + 2.0;
  out.floor = 1.0 / denom;
  out.distribution = {(static_cast<double>(out.count_up) + 1.0) / denom,
                      (static_cast<double>(out.count_down) + 1.0) / denom};
  out.wilson_up = wilson_interval(out.count_up, out.n, z);
  out.wilson_down = wilson_interval(out.count_down, out.n, z);
  return out;
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::J: return "J";
    case Quantity::sigma: return "sigma";
    case Quantity::Q_total: return "Q_total";
    case Quantity::W: return "W";
    case Quantity::jump_count: return "jump_count";
  }
  return "J";
}

Quantity parse_quantity(const std::string& name) {
  for (Quantity q : {Quantity::J, Quantity::sigma, Quantity::Q_total,
                     Quantity::W, Quantity::jump_count})
    if (to_string(q) == name) return q;
  throw ConfigError("unknown quantity '" + name +
                    "' (J, sigma, Q_total, W, jump_count)");
}

std::uint64_t Histogram::total() const {
  std::uint64_t sum = underflow + overflow;
  for (auto c : counts) sum += c;
  return sum;
}

std::vector<double> quantity_values(const TrajectorySet& set,
                                    const SimConfig& config,
                                    const MeasurementModel& mm, Quantity q) {
  std::vector<double> out;
  out.reserve(set.size());
  for (const Trajectory& t : set.trajectories) {
    switch (q) {
      case Quantity::J:
        out.push_back(entropy_flux(t, config.physics, config.drive));
        break;
      case Quantity::sigma:
        out.push_back(
            entropy_production(t, mm, config.physics, config.drive));
        break;
      case Quantity::Q_total:
        out.push_back(work_and_energy(t, config.physics, config.drive).Q_total);
        break;
      case Quantity::W:
        out.push_back(t.total_work());
        break;
      case Quantity::jump_count:
        out.push_back(static_cast<double>(t.jumps.size()));
        break;
    }
  }
  return out;
}

Histogram make_histogram(Quantity q, std::span<const double> values,
                         std::vector<double> edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw DomainError("histogram edges must be strictly increasing");
  Histogram h;
  h.quantity = q;
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (v < edges.front() || std::isnan(v)) {
      ++h.underflow;
    } else if (v > edges.back()) {
      ++h.overflow;
    } else {
      auto it = std::upper_bound(edges.begin(), edges.end(), v);
      std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
      h.counts[std::min(bin, h.counts.size() - 1)] += 1;
    }
  }
  h.edges = std::move(edges);
  return h;
}

Histogram make_histogram(Quantity q, std::span<const double> values,
                         int bins) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  double lo = 0, hi = 1;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(bins + 1);
  for (int k = 0; k <= bins; ++k) edges[k] = lo + (hi - lo) * k / bins;
  edges.back() = hi;
  return make_histogram(q, values, std::move(edges));
}

OracleComparison compare_to_oracle(const TrajectorySet& set,
                                   const SimConfig& config, double floor,
                                   const Tolerances& tol) {
  if (config.physics.kappa != 0)
    throw DomainError("oracle comparison requires kappa = 0");
  require_forward(set, config_digest(config));
  if (set.empty()) throw DomainError("oracle comparison of an empty set");
  std::vector<double> times;
  for (const Checkpoint& cp : set.trajectories.front().checkpoints)
    times.push_back(cp.time);
  if (times.empty())
    throw DomainError("trajectories carry no checkpoints (numerics.checkpoints)");

  // Per checkpoint: rho00, rho11, Re rho01, Im rho01.
  std::vector<std::array<RunningStats, 4>> stats(times.size());
  for (const Trajectory& t : set.trajectories) {
    if (t.checkpoints.size() != times.size())
      throw MixedEnsembleError("trajectories disagree on checkpoint times");
    for (std::size_t k = 0; k < times.size(); ++k) {
      const Vector2cd& phi = t.checkpoints[k].state;
      const Complex<double> off = phi(0) * std::conj(phi(1));
      stats[k][0].add(std::norm(phi(0)));
      stats[k][1].add(std::norm(phi(1)));
      stats[k][2].add(off.real());
      stats[k][3].add(off.imag());
    }
  }
  const auto oracle = lindblad_fixed_T(config, times, tol);

  OracleComparison out;
  out.n = set.size();
  out.floor = floor;
  out.passed = true;
  for (std::size_t k = 0; k < times.size(); ++k) {
    CheckpointComparison c;
    c.time = times[k];
    c.oracle = oracle[k].rho;
    const auto& s = stats[k];
    const Complex<double> off(s[2].mean(), s[3].mean());
    c.ensemble << s[0].mean(), off, std::conj(off), s[1].mean();
    c.std_error_real << s[0].std_error(), s[2].std_error(), s[2].std_error(),
        s[1].std_error();
    c.std_error_imag << 0.0, s[3].std_error(), s[3].std_error(), 0.0;
    const std::array<std::pair<double, double>, 4> entries = {{
        {s[0].mean() - c.oracle(0, 0).real(), s[0].std_error()},
        {s[1].mean() - c.oracle(1, 1).real(), s[1].std_error()},
        {s[2].mean() - c.oracle(0, 1).real(), s[2].std_error()},
        {s[3].mean() - c.oracle(0, 1).imag(), s[3].std_error()},
    }};
    for (const auto& [dev, se] : entries) {
      const double a = std::abs(dev);
      c.max_deviation = std::max(c.max_deviation, a);
      if (se > 0) c.max_z = std::max(c.max_z, a / se);
      if (a > 3.0 * se + floor) out.passed = false;
    }
    out.max_deviation = std::max(out.max_deviation, c.max_deviation);
    out.max_z = std::max(out.max_z, c.max_z);
    out.checkpoints.push_back(c);
  }
  return out;
}

std::uint64_t marginal_pass_seed(std::uint64_t base_seed) {
  return derive_seed(base_seed ^ 0x6d617267696e616cULL, 0);
}

ResolvedFinal resolve_final_distribution(const SimConfig& config,
                                         int workers) {
  ResolvedFinal out;
  out.source = config.measurement.final_source;
  if (out.source == FinalSource::automatic)
    out.source = config.physics.kappa == 0 ? FinalSource::oracle
                                           : FinalSource::empirical;
  switch (out.source) {
    case FinalSource::automatic:
    case FinalSource::configured:
      out.distribution = config.measurement.final;
      break;
    case FinalSource::empirical: {
      out.pass_n = config.ensemble.marginal_pass_n;
      out.pass_seed = marginal_pass_seed(config.ensemble.seed);
      EnsembleOptions options;
      options.workers = workers;
      const TrajectorySet pass =
          run_ensemble(config, out.pass_n, out.pass_seed, options);
      if (!pass.failures.empty()) {
        std::ostringstream os;
        os << pass.failures.size()
           << " trajectories failed in the marginal pass: "
           << pass.failures.front().message;
        throw Error(os.str());
      }
      out.distribution = empirical_final_marginal(pass).distribution;
      break;
    }
    case FinalSource::oracle:
      out.distribution = lindblad_final_marginal(config);
      break;
  }
  return out;
}

}  // namespace qcal
