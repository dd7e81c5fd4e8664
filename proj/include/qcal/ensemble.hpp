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

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qcal/config.hpp"
#include "qcal/dormand_prince.hpp"
#include "qcal/trajectory.hpp"

namespace qcal {

/// Mean and variance accumulator with an exact pairwise merge.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance (0 for fewer than two samples).
  double variance() const;
  double std_error() const;
  double max() const { return max_; }

 private:
  std::uint64_t n_{0};
  double mean_{0};
  double m2_{0};
  double max_{-std::numeric_limits<double>::infinity()};
};

struct JackknifeEstimate {
  double mean{};
  double std_error{};
};

/// Delete-one jackknife of the sample mean. Requires at least two samples.
JackknifeEstimate jackknife_mean(std::span<const double> samples);

struct FrEstimate {
  double mean_exp_neg_sigma{};
  /// Jackknife standard error of mean_exp_neg_sigma.
  double std_error{};
  std::uint64_t n{};
  double mean_sigma{};
  double sigma_std_error{};
  /// Largest single-trajectory e^{-sigma}; a heavy tail shows up here first.
  double max_weight{};
  /// Trajectories the engine could not complete (they are not in the mean).
  std::uint64_t failed{};
  std::string config_digest;
  Distribution final_reference;
  /// |mean - 1| <= 3 std_error and no failed trajectories.
  bool passed{};
};

/// e^{-sigma} per trajectory, in set order.
std::vector<double> exp_neg_sigma(const TrajectorySet& set,
                                  const SimConfig& config,
                                  const MeasurementModel& mm);

/// Jackknife estimate of <e^{-sigma}> and <sigma>. The set must be forward
/// and sampled from `config`; mm supplies P_i and P_f. Throws
/// MixedEnsembleError otherwise.
FrEstimate estimate_fr(const TrajectorySet& set, const SimConfig& config,
                       const MeasurementModel& mm);

/// Same over shards of one ensemble; equal to the unsharded computation.
FrEstimate estimate_fr(std::span<const TrajectorySet> shards,
                       const SimConfig& config, const MeasurementModel& mm);

struct Interval {
  double lo{};
  double hi{};
};

struct MarginalEstimate {
  /// Smoothed frequencies (count + 1) / (n + 2); never zero.
  Distribution distribution;
  std::uint64_t n{};
  std::uint64_t count_up{};
  std::uint64_t count_down{};
  /// Smoothing floor 1 / (n + 2).
  double floor{};
  /// Wilson score intervals for the raw frequencies.
  Interval wilson_up;
  Interval wilson_down;
};

MarginalEstimate empirical_final_marginal(const TrajectorySet& set,
                                          double z = 1.959963984540054);

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z);

enum class Quantity { J, sigma, Q_total, W, jump_count };

std::string to_string(Quantity q);
Quantity parse_quantity(const std::string& name);

struct Histogram {
  Quantity quantity{Quantity::J};
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow{};
  std::uint64_t overflow{};

  std::uint64_t total() const;
};

/// Per-trajectory values of a path quantity.
std::vector<double> quantity_values(const TrajectorySet& set,
                                    const SimConfig& config,
                                    const MeasurementModel& mm, Quantity q);

/// Bins [edges[k], edges[k + 1]); the last bin also holds edges.back().
Histogram make_histogram(Quantity q, std::span<const double> values,
                         std::vector<double> edges);

/// `bins` equal-width bins spanning the sample range.
Histogram make_histogram(Quantity q, std::span<const double> values, int bins);

struct CheckpointComparison {
  double time{};
  Matrix2cd ensemble;
  Matrix2cd oracle;
  /// Standard errors of the real and imaginary parts of each entry.
  Eigen::Matrix2d std_error_real;
  Eigen::Matrix2d std_error_imag;
  double max_deviation{};
  /// Largest |deviation| / std_error over the independent entries.
  double max_z{};
};

struct OracleComparison {
  std::vector<CheckpointComparison> checkpoints;
  double max_deviation{};
  double max_z{};
  std::uint64_t n{};
  /// Every entry within 3 standard errors plus `floor`.
  bool passed{};
  double floor{};
};

/// Ensemble average of |phi><phi| at the recorded checkpoints against the
/// fixed-temperature Lindblad solution. Requires kappa = 0 and a set sampled
/// from `config` with checkpoints.
OracleComparison compare_to_oracle(const TrajectorySet& set,
                                   const SimConfig& config,
                                   double floor = 1e-8,
                                   const Tolerances& tol = {});

struct ResolvedFinal {
  Distribution distribution;
  FinalSource source{FinalSource::configured};
  /// Trajectories used by the empirical first pass (0 otherwise).
  std::uint64_t pass_n{};
  std::uint64_t pass_seed{};
};

/// Base seed of the empirical first pass, distinct from the main run's.
std::uint64_t marginal_pass_seed(std::uint64_t base_seed);

/// P_f for a run: the configured law, a smoothed empirical marginal from an
/// independent first pass, or the Lindblad marginal (kappa = 0 only).
/// `source` reports what `automatic` resolved to.
ResolvedFinal resolve_final_distribution(const SimConfig& config,
                                         int workers = 1);

}  // namespace qcal
