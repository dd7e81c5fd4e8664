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

// qcal: sample, verify and export calorimetric quantum-jump trajectories.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "qcal/config_io.hpp"
#include "qcal/engine.hpp"
#include "qcal/ensemble.hpp"
#include "qcal/errors.hpp"
#include "qcal/oracles.hpp"
#include "qcal/serialization.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3, kGate = 4, kIo = 5 };

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> n;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, Common& c, bool with_format = true) {
  // Unreadable files are reported by the loaders as I/O errors (exit 5).
  cmd->add_option("--config", c.config_path, "Configuration file (YAML)")
      ->required();
  cmd->add_option("--seed", c.seed, "Base seed");
  cmd->add_option("--n", c.n, "Number of trajectories");
  cmd->add_option("--workers", c.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory");
  if (with_format)
    cmd->add_option("--format", c.format, "text, binary or csv")
        ->check(CLI::IsMember({"auto", "text", "binary", "csv"}));
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

/// Loads the config and applies flag > environment > file precedence.
qcal::ParsedConfig load(const Common& c) {
  qcal::ParsedConfig parsed = qcal::load_config(c.config_path);
  qcal::EnsembleSettings& e = parsed.config.ensemble;
  if (auto w = env("QCAL_WORKERS")) {
    try {
      e.workers = std::stoi(*w);
    } catch (const std::exception&) {
      throw qcal::ConfigError("QCAL_WORKERS must be an integer, not '" + *w +
                              "'");
    }
  }
  if (auto o = env("QCAL_OUT_DIR")) e.out_dir = *o;
  if (c.seed) e.seed = *c.seed;
  if (c.n) e.n = *c.n;
  if (c.workers) e.workers = *c.workers;
  if (c.out) e.out_dir = *c.out;
  if (c.format) e.format = qcal::parse_output_format(*c.format);
  if (e.workers < 1) throw qcal::ConfigError("workers must be at least 1");
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  return parsed;
}

qcal::TrajectorySet sample(const qcal::SimConfig& config,
                           qcal::Direction direction) {
  qcal::EnsembleOptions options;
  options.workers = config.ensemble.workers;
  options.fail_fast = config.ensemble.fail_fast;
  options.direction = direction;
  return qcal::run_ensemble(config, config.ensemble.n, config.ensemble.seed,
                            options);
}

qcal::RunManifest start_manifest(const std::string& command,
                                 const qcal::ParsedConfig& parsed) {
  qcal::RunManifest m;
  m.command = command;
  m.config_digest = qcal::config_digest(parsed.config);
  m.base_seed = parsed.config.ensemble.seed;
  m.n = parsed.config.ensemble.n;
  m.started_at = qcal::utc_timestamp();
  m.warnings = parsed.warnings;
  return m;
}

void finish_manifest(qcal::RunManifest& m, const fs::path& dir,
                     const std::string& stem) {
  m.finished_at = qcal::utc_timestamp();
  qcal::write_manifest(dir / (stem + ".manifest.json"), m);
}

void report_failures(const qcal::TrajectorySet& set) {
  if (set.failures.empty()) return;
  std::cerr << set.failures.size() << " trajectories failed; first: "
            << set.failures.front().kind << ": "
            << set.failures.front().message << '\n';
}

int run_sampling(const Common& c, qcal::Direction direction) {
  const auto parsed = load(c);
  const qcal::SimConfig& config = parsed.config;
  const std::string stem =
      direction == qcal::Direction::forward ? "forward" : "reversed";
  auto manifest = start_manifest(stem == "forward" ? "simulate" : "reverse",
                                 parsed);
  const auto set = sample(config, direction);
  manifest.failed = set.failures.size();
  const fs::path dir = config.ensemble.out_dir;
  const auto path = qcal::write_trajectory_file(
      dir, stem, set, config.ensemble.format, config, config.measurement);
  qcal::add_file(manifest, path);
  finish_manifest(manifest, dir, stem);
  report_failures(set);
  std::cout << set.size() << " trajectories -> " << path.string() << '\n';
  return set.failures.empty() ? kOk : kNumeric;
}

int run_verify_fr(const Common& c, const std::string& final_override) {
  auto parsed = load(c);
  qcal::SimConfig& config = parsed.config;
  if (final_override == "uniform") {
    config.measurement.final = qcal::Distribution::uniform();
    config.measurement.final_source = qcal::FinalSource::configured;
  } else if (final_override == "empirical") {
    config.measurement.final_source = qcal::FinalSource::empirical;
  } else if (final_override == "oracle") {
    config.measurement.final_source = qcal::FinalSource::oracle;
  }
  auto manifest = start_manifest("verify-fr", parsed);
  const auto resolved =
      qcal::resolve_final_distribution(config, config.ensemble.workers);
  const auto set = sample(config, qcal::Direction::forward);
  report_failures(set);
  qcal::MeasurementModel mm = config.measurement;
  mm.final = resolved.distribution;
  const auto estimate = qcal::estimate_fr(set, config, mm);
  manifest.failed = estimate.failed;

  const fs::path dir = config.ensemble.out_dir;
  fs::create_directories(dir);
  const auto json_path = dir / "fr_report.json";
  const auto csv_path = dir / "fr_report.csv";
  {
    std::ofstream j(json_path), s(csv_path);
    if (!j || !s) throw qcal::IoError("cannot write reports in " + dir.string());
    j << qcal::fr_report_json(estimate, config.ensemble.seed);
    s << qcal::fr_report_csv(estimate, config.ensemble.seed);
  }
  qcal::add_file(manifest, json_path);
  qcal::add_file(manifest, csv_path);
  finish_manifest(manifest, dir, "verify-fr");

  std::cout << std::setprecision(8) << "<exp(-sigma)> = "
            << estimate.mean_exp_neg_sigma << " +/- " << estimate.std_error
            << " (n = " << estimate.n << ", <sigma> = " << estimate.mean_sigma
            << ", P_f(up) = " << mm.final.up << ") "
            << (estimate.passed ? "PASS" : "FAIL") << '\n';
  return estimate.passed ? kOk : kGate;
}

struct OracleFlags {
  bool per_path_fr{false};
  bool sum{false};
  bool lindblad{false};
  bool lattice{false};
  int n_steps{10};
  std::string kernel{"exact"};
  std::vector<std::string> assignments;
  int points{10};
};

Json rho_json(const qcal::Matrix2cd& rho) {
  return {{"rho_down_down", rho(0, 0).real()},
          {"rho_up_up", rho(1, 1).real()},
          {"rho_down_up_re", rho(0, 1).real()},
          {"rho_down_up_im", rho(0, 1).imag()}};
}

int run_oracle(const Common& c, OracleFlags f) {
  for (const auto& a : f.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || a.substr(0, eq) != "n_steps")
      throw qcal::ConfigError("unknown oracle argument '" + a + "'");
    f.n_steps = std::stoi(a.substr(eq + 1));
  }
  if (!f.per_path_fr && !f.sum && !f.lindblad && !f.lattice) f.sum = true;
  const auto parsed = load(c);
  const qcal::SimConfig& config = parsed.config;
  const auto kernel = f.kernel == "independent"
                          ? qcal::ReversedKernel::independent
                          : qcal::ReversedKernel::exact_adjoint;
  Json out = {{"config_digest", qcal::config_digest(config)}};
  bool passed = true;

  if (f.per_path_fr || f.sum) {
    const auto s = qcal::summarize_enumeration(config, f.n_steps, kernel,
                                               std::nullopt, f.per_path_fr);
    const double eps =
        5.0 * s.n_steps * std::pow(s.max_total_rate * s.dt, 2);
    const bool conserved = std::abs(s.total_probability - 1) <= eps;
    out["enumeration"] = {{"n_steps", s.n_steps},
                          {"dt", s.dt},
                          {"paths", s.path_count},
                          {"total_probability", s.total_probability},
                          {"tolerance", eps},
                          {"conserved", conserved},
                          {"mean_exp_neg_sigma", s.mean_exp_neg_sigma},
                          {"mean_sigma", s.mean_sigma},
                          {"final_up", s.final_marginal.up},
                          {"jump_counts", s.jump_count_distribution}};
    if (f.sum) passed = passed && conserved;
    if (f.per_path_fr) {
      const bool ok = s.max_fr_deviation < 1e-10;
      out["per_path_fr"] = {{"kernel", f.kernel},
                            {"max_deviation", s.max_fr_deviation},
                            {"passed", ok}};
      // The independent discretization only converges as dt -> 0.
      if (kernel == qcal::ReversedKernel::exact_adjoint) passed = passed && ok;
    }
  }
  std::vector<double> times;
  for (int k = 1; k <= f.points; ++k)
    times.push_back(k == f.points ? config.t_f()
                                  : config.t_i() + k * config.drive.duration() /
                                                       f.points);
  if (f.lindblad) {
    Json series = Json::array();
    for (const auto& cp : qcal::lindblad_fixed_T(config, times)) {
      Json row = rho_json(cp.rho);
      row["time"] = cp.time;
      series.push_back(row);
    }
    out["lindblad"] = series;
  }
  if (f.lattice) {
    qcal::Matrix2cd rho0 = qcal::Matrix2cd::Zero();
    rho0(0, 0) = config.measurement.initial.down;
    rho0(1, 1) = config.measurement.initial.up;
    const auto snaps = qcal::joint_master_equation(config, times, rho0);
    Json series = Json::array();
    for (const auto& lat : snaps) {
      Json row = rho_json(lat.marginal());
      row["time"] = lat.time;
      row["trace"] = lat.trace();
      row["levels"] = {lat.m_min, lat.m_max()};
      row["residual"] = qcal::master_equation_residual(config, lat);
      series.push_back(row);
    }
    out["lattice"] = series;
  }
  std::cout << out.dump(2) << '\n';
  return passed ? kOk : kGate;
}

int run_compare(const Common& c, double floor) {
  auto parsed = load(c);
  qcal::SimConfig& config = parsed.config;
  if (config.numerics.checkpoints == 0) config.numerics.checkpoints = 10;
  const auto set = sample(config, qcal::Direction::forward);
  report_failures(set);
  const auto report = qcal::compare_to_oracle(set, config, floor);
  Json rows = Json::array();
  for (const auto& cp : report.checkpoints) {
    Json row = {{"time", cp.time},
                {"max_deviation", cp.max_deviation},
                {"max_z", cp.max_z}};
    row["ensemble"] = rho_json(cp.ensemble);
    row["oracle"] = rho_json(cp.oracle);
    rows.push_back(row);
  }
  const Json out = {{"config_digest", qcal::config_digest(config)},
                    {"n", report.n},
                    {"max_deviation", report.max_deviation},
                    {"max_z", report.max_z},
                    {"passed", report.passed && set.failures.empty()},
                    {"checkpoints", rows}};
  std::cout << out.dump(2) << '\n';
  return report.passed && set.failures.empty() ? kOk : kGate;
}

struct ExportFlags {
  std::string input;
  std::string format{"text"};
  std::string out{"."};
  std::string config_path;
};

int run_export(const ExportFlags& f) {
  const auto set = qcal::read_trajectory_file(f.input);
  const auto format = qcal::parse_output_format(f.format);
  qcal::SimConfig config;
  if (format == qcal::OutputFormat::csv) {
    if (f.config_path.empty())
      throw qcal::ConfigError("CSV export needs --config for thermodynamics");
    config = qcal::load_config(f.config_path).config;
    if (!set.empty() && qcal::config_digest(config) != set.config_digest)
      throw qcal::MixedEnsembleError(
          "trajectory set was not sampled from this config");
  }
  const std::string stem = fs::path(f.input).stem().string();
  const auto path = qcal::write_trajectory_file(
      f.out, stem, set, format, config, config.measurement);
  std::cout << set.size() << " trajectories -> " << path.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calorimetric quantum-jump trajectories of a driven qubit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QCAL_VERSION);

  Common simulate_flags, reverse_flags, fr_flags, oracle_common, compare_flags;
  auto* simulate = app.add_subcommand("simulate", "Sample forward trajectories");
  add_common(simulate, simulate_flags);
  auto* reverse = app.add_subcommand("reverse", "Sample reversed trajectories");
  add_common(reverse, reverse_flags);

  std::string final_override = "config";
  auto* verify = app.add_subcommand(
      "verify-fr", "Estimate <exp(-sigma)> and gate on |mean - 1| < 3 SE");
  add_common(verify, fr_flags, false);
  verify->add_option("--final", final_override, "Source of P_f")
      ->check(CLI::IsMember({"config", "uniform", "empirical", "oracle"}));

  OracleFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle", "Deterministic reference computations");
  add_common(oracle, oracle_common, false);
  oracle->add_flag("--per-path-fr", oracle_flags.per_path_fr,
                   "Check P_fwd = P_rev e^J on every enumerated path");
  oracle->add_flag("--sum", oracle_flags.sum,
                   "Total probability of the enumerated paths");
  oracle->add_flag("--lindblad", oracle_flags.lindblad,
                   "Fixed-temperature Lindblad solution");
  oracle->add_flag("--lattice", oracle_flags.lattice,
                   "Joint master equation on the temperature lattice");
  oracle->add_option("--n-steps", oracle_flags.n_steps, "Enumeration steps")
      ->check(CLI::Range(1, qcal::kMaxEnumerationSteps));
  oracle->add_option("--kernel", oracle_flags.kernel, "Reversed discretization")
      ->check(CLI::IsMember({"exact", "independent"}));
  oracle->add_option("--points", oracle_flags.points, "Output times")
      ->check(CLI::PositiveNumber);
  oracle->add_option("assignments", oracle_flags.assignments, "n_steps=N");

  double floor = 1e-8;
  auto* compare = app.add_subcommand(
      "compare", "Ensemble density matrix against the Lindblad oracle");
  add_common(compare, compare_flags, false);
  compare->add_option("--floor", floor, "Absolute tolerance added to 3 SE");

  ExportFlags export_flags;
  auto* exporter = app.add_subcommand("export", "Convert a trajectory file");
  exporter->add_option("input", export_flags.input, "Trajectory file")
      ->required();
  exporter->add_option("--format", export_flags.format, "text, binary or csv")
      ->check(CLI::IsMember({"text", "binary", "csv"}));
  exporter->add_option("--out", export_flags.out, "Output directory");
  exporter->add_option("--config", export_flags.config_path,
                       "Config of the set (needed for csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*simulate) return run_sampling(simulate_flags, qcal::Direction::forward);
    if (*reverse) return run_sampling(reverse_flags, qcal::Direction::reversed);
    if (*verify) return run_verify_fr(fr_flags, final_override);
    if (*oracle) return run_oracle(oracle_common, oracle_flags);
    if (*compare) return run_compare(compare_flags, floor);
    if (*exporter) return run_export(export_flags);
  } catch (const qcal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const qcal::ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kConfig;
  } catch (const qcal::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const qcal::Error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
