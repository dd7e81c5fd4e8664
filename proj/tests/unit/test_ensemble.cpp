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
#include "qcal/engine.hpp"
#include "qcal/ensemble.hpp"
#include "qcal/errors.hpp"
#include "qcal/oracles.hpp"
#include "qcal/path_thermo.hpp"

using namespace qcal;

TEST_CASE("running statistics merge like a single pass") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(3.0, 2.0);
  RunningStats all, a, b;
  std::vector<double> xs;
  for (int k = 0; k < 1000; ++k) {
    const double x = n(rng);
    xs.push_back(x);
    all.add(x);
    (k < 377 ? a : b).add(x);
  }
  a.merge(b);
  CHECK(a.count() == all.count());
  CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-13));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
  CHECK(a.max() == all.max());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size() - 1;
  CHECK(all.variance() == doctest::Approx(var).epsilon(1e-12));
  CHECK(all.std_error() == doctest::Approx(std::sqrt(var / xs.size())));

  const JackknifeEstimate jk = jackknife_mean(xs);
  CHECK(jk.mean == doctest::Approx(mean));
  CHECK(jk.std_error == doctest::Approx(all.std_error()).epsilon(1e-10));
}

TEST_CASE("standard error shrinks as one over root n") {
  std::mt19937_64 rng(9);
  std::exponential_distribution<double> e(1.0);
  RunningStats small, large;
  for (int k = 0; k < 200000; ++k) {
    const double x = e(rng);
    if (k < 100000) small.add(x);
    large.add(x);
  }
  CHECK(large.std_error() / small.std_error() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("closed system satisfies the relation exactly") {
  auto c = fixtures::driven(0.0, 1.0);
  const TrajectorySet set = run_ensemble(c, 500, 3);
  const FrEstimate fr = estimate_fr(set, c, c.measurement);
  CHECK(fr.mean_exp_neg_sigma == 1.0);
  CHECK(fr.std_error == 0.0);
  CHECK(fr.n == 500);
  CHECK(fr.passed);
}

TEST_CASE("fr estimate is consistent with the per-path values") {
  auto c = fixtures::driven(0.8, 1.0, 0.02);
  const TrajectorySet set = run_ensemble(c, 2000, 17);
  const std::vector<double> w = exp_neg_sigma(set, c, c.measurement);
  RunningStats s;
  for (double x : w) s.add(x);
  const FrEstimate fr = estimate_fr(set, c, c.measurement);
  CHECK(fr.mean_exp_neg_sigma == doctest::Approx(s.mean()).epsilon(1e-13));
  CHECK(fr.std_error == doctest::Approx(s.std_error()).epsilon(1e-10));
  CHECK(fr.max_weight == s.max());
  CHECK(fr.config_digest == set.config_digest);
  for (std::size_t k = 0; k < w.size(); ++k)
    CHECK(w[k] == doctest::Approx(std::exp(-entropy_production(
                      set.trajectories[k], c.measurement, c.physics, c.drive))));
}

TEST_CASE("sharded estimates merge exactly") {
  auto c = fixtures::driven(0.8, 1.0);
  const TrajectorySet whole = run_ensemble(c, 600, 4);
  TrajectorySet a = whole, b = whole;
  a.trajectories.resize(250);
  b.trajectories.erase(b.trajectories.begin(), b.trajectories.begin() + 250);
  const std::vector<TrajectorySet> shards{a, b};
  const FrEstimate merged = estimate_fr(shards, c, c.measurement);
  const FrEstimate single = estimate_fr(whole, c, c.measurement);
  CHECK(merged.n == single.n);
  CHECK(merged.mean_exp_neg_sigma == doctest::Approx(single.mean_exp_neg_sigma).epsilon(1e-13));
  CHECK(merged.std_error == doctest::Approx(single.std_error).epsilon(1e-10));

  TrajectorySet other = run_ensemble(fixtures::driven(0.5, 1.0), 10, 4);
  const std::vector<TrajectorySet> mixed{a, other};
  CHECK_THROWS_AS(estimate_fr(mixed, c, c.measurement), MixedEnsembleError);
  TrajectorySet reversed = a;
  reversed.direction = Direction::reversed;
  const std::vector<TrajectorySet> wrong{reversed};
  CHECK_THROWS_AS(estimate_fr(wrong, c, c.measurement), MixedEnsembleError);
}

TEST_CASE("empirical marginal is smoothed and bracketed") {
  TrajectorySet set;
  for (int k = 0; k < 10; ++k) {
    Trajectory t;
    t.final_label = k < 7 ? Level::up : Level::down;
    set.trajectories.push_back(t);
  }
  const MarginalEstimate m = empirical_final_marginal(set);
  CHECK(m.count_up == 7);
  CHECK(m.count_down == 3);
  CHECK(m.distribution.up == doctest::Approx(8.0 / 12));
  CHECK(m.distribution.down == doctest::Approx(4.0 / 12));
  CHECK(m.wilson_up.lo < 0.7);
  CHECK(m.wilson_up.hi > 0.7);

  TrajectorySet all_down;
  all_down.trajectories.resize(5);
  const MarginalEstimate d = empirical_final_marginal(all_down);
  CHECK(d.distribution.up == doctest::Approx(1.0 / 7));
  CHECK(d.distribution.up > 0);
}

TEST_CASE("wilson interval matches the closed form") {
  const double z = 1.959963984540054;
  const Interval i = wilson_interval(30, 100, z);
  const double p = 0.3, n = 100;
  const double centre = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  CHECK(i.lo == doctest::Approx(centre - half));
  CHECK(i.hi == doctest::Approx(centre + half));
  const Interval zero = wilson_interval(0, 50, z);
  CHECK(zero.lo == doctest::Approx(0.0));
  CHECK(zero.hi > 0);
}

TEST_CASE("histograms account for every sample") {
  const std::vector<double> v{-1.0, 0.0, 0.1, 0.5, 0.99, 1.0, 2.0};
  const Histogram h = make_histogram(Quantity::J, v, {0.0, 0.5, 1.0});
  CHECK(h.underflow == 1);
  CHECK(h.overflow == 1);
  CHECK(h.counts.size() == 2);
  CHECK(h.total() == v.size());
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[1] == 3);

  const Histogram auto_bins = make_histogram(Quantity::W, v, 4);
  CHECK(auto_bins.edges.size() == 5);
  CHECK(auto_bins.total() == v.size());
  CHECK(auto_bins.underflow + auto_bins.overflow == 0);

  for (Quantity q : {Quantity::J, Quantity::sigma, Quantity::Q_total, Quantity::W, Quantity::jump_count})
    CHECK(parse_quantity(to_string(q)) == q);
  CHECK_THROWS(parse_quantity("entropy"));
}

TEST_CASE("quantity values follow the path functionals") {
  auto c = fixtures::driven(0.7, 1.0);
  const TrajectorySet set = run_ensemble(c, 50, 8);
  const auto jumps = quantity_values(set, c, c.measurement, Quantity::jump_count);
  const auto work = quantity_values(set, c, c.measurement, Quantity::W);
  for (std::size_t k = 0; k < set.size(); ++k) {
    CHECK(jumps[k] == set.trajectories[k].jumps.size());
    CHECK(work[k] == set.trajectories[k].total_work());
  }
}

TEST_CASE("ensemble density matrix agrees with the lindblad oracle") {
  auto c = fixtures::driven(0.7, 1.0);
  c.numerics.checkpoints = 4;
  const TrajectorySet set = run_ensemble(c, 20000, 13);
  const OracleComparison cmp = compare_to_oracle(set, c);
  CHECK(cmp.checkpoints.size() == 4);
  CHECK(cmp.n == 20000);
  CHECK(cmp.passed);
  auto finite = fixtures::driven(0.7, 1.0, 0.05);
  CHECK_THROWS(compare_to_oracle(set, finite));
}

TEST_CASE("final distribution resolution") {
  auto c = fixtures::driven(0.7, 1.0);
  c.measurement.final_source = FinalSource::configured;
  c.measurement.final = Distribution{0.2, 0.8};
  CHECK(resolve_final_distribution(c).distribution == Distribution{0.2, 0.8});

  c.measurement.final_source = FinalSource::automatic;
  const ResolvedFinal oracle = resolve_final_distribution(c);
  CHECK(oracle.source == FinalSource::oracle);
  CHECK(oracle.distribution.up == doctest::Approx(lindblad_final_marginal(c).up));

  auto k = fixtures::driven(0.7, 1.0, 0.02);
  k.measurement.final_source = FinalSource::automatic;
  k.ensemble.marginal_pass_n = 500;
  const ResolvedFinal emp = resolve_final_distribution(k);
  CHECK(emp.source == FinalSource::empirical);
  CHECK(emp.pass_n == 500);
  CHECK(emp.pass_seed == marginal_pass_seed(k.ensemble.seed));
  CHECK(emp.pass_seed != k.ensemble.seed);
  CHECK(emp.distribution.up + emp.distribution.down == doctest::Approx(1.0));
}
