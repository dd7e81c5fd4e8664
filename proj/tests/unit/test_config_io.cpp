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
#include <filesystem>
#include <fstream>
#include <numbers>

#include "qcal/config_io.hpp"
#include "qcal/errors.hpp"

using namespace qcal;

namespace {

constexpr const char* kMinimal = R"(
physics:
  omega0: 1.0
  gamma: 0.5
  T0: 1.0
drive:
  kind: sin2
  t_i: 0.0
  t_f: 4.0
  lambda_max: 0.5
)";

std::filesystem::path config_dir() { return QCAL_CONFIG_DIR; }

}  // namespace

TEST_CASE("minimal configuration takes defaults") {
  const ParsedConfig p = parse_config(kMinimal);
  const SimConfig& c = p.config;
  CHECK(p.warnings.empty());
  CHECK(c.physics.kappa == 0.0);
  CHECK(c.drive.kind() == DriveProtocol::Kind::sin2);
  CHECK(c.drive.lambda_max() == 0.5);
  CHECK(c.measurement.initial == Distribution::uniform());
  CHECK(c.measurement.final_source == FinalSource::automatic);
  CHECK(!c.reversed_preparation);
  CHECK(c.reversed_initial() == c.measurement.final);
  CHECK(!c.phonon.enabled);
  CHECK(c.numerics == NumericalSettings{});
  CHECK(c.ensemble == EnsembleSettings{});
}

TEST_CASE("distribution shorthands") {
  std::string text = std::string(kMinimal) + R"(
measurement:
  initial: thermal
  final: {up: 0.25, down: 0.75}
reversed_preparation: up
)";
  const SimConfig c = parse_config(text).config;
  CHECK(c.measurement.initial.up == doctest::Approx(1.0 / (std::exp(1.0) + 1)));
  CHECK(c.measurement.initial.up + c.measurement.initial.down == doctest::Approx(1.0));
  CHECK(c.measurement.final == Distribution{0.25, 0.75});
  CHECK(c.measurement.final_source == FinalSource::configured);
  CHECK(c.reversed_initial() == Distribution::certain(Level::up));

  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "measurement:\n  initial: {up: 0.3, down: 0.3}\n"),
                  ValidationError);
}

TEST_CASE("drive must vanish at the end points") {
  try {
    load_config(std::filesystem::path(QCAL_TEST_DATA_DIR) / "bad_endpoint.yaml");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("t_f") != std::string::npos);
  }
}

TEST_CASE("large heat capacity jumps are accepted with a warning") {
  const std::string text = std::string(kMinimal) + "";
  std::string k = text;
  k.replace(k.find("T0: 1.0"), 7, "T0: 1.0\n  kappa: 0.05");
  const ParsedConfig p = parse_config(k);
  REQUIRE(p.warnings.size() == 1);
  CHECK(p.warnings[0].find("Sommerfeld") != std::string::npos);
  k.replace(k.find("kappa: 0.05"), 11, "kappa: 0.005");
  CHECK(parse_config(k).warnings.empty());
}

TEST_CASE("unknown keys and syntax errors report their location") {
  const std::string text = std::string(kMinimal) + "numerics:\n  rel_tol: 1e-9\n  stepsize: 0.1\n";
  try {
    parse_config(text);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 13);
    CHECK(e.column() == 3);
    CHECK(std::string(e.what()).find("stepsize") != std::string::npos);
  }
  try {
    parse_config("physics:\n  omega0: [1.0\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() >= 2);
  }
  CHECK_THROWS_AS(parse_config("drive:\n  kind: sin2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "ensemble:\n  format: parquet\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/qcal.yaml"), IoError);
}

TEST_CASE("serialization round trips every shipped configuration") {
  for (const auto& entry : std::filesystem::directory_iterator(config_dir())) {
    if (entry.path().extension() != ".yaml") continue;
    INFO(entry.path().string());
    const SimConfig c = load_config(entry.path()).config;
    const SimConfig back = parse_config(serialize_config(c)).config;
    CHECK(back == c);
    CHECK(config_digest(back) == config_digest(c));
  }
  SimConfig t = parse_config(kMinimal).config;
  t.drive = DriveProtocol::tabulated({0.0, 0.5, 1.5, 2.0}, {0.0, 0.3, -0.1, 0.0});
  t.reversed_preparation = Distribution{0.1, 0.9};
  t.phonon = PhononParams{true, 3.0, 0.8, 4};
  t.physics.kappa = 0.001;
  t.ensemble.format = OutputFormat::csv;
  CHECK(parse_config(serialize_config(t)).config == t);
}

TEST_CASE("digest ignores key order and ensemble settings") {
  const std::string reordered = R"(
drive: {lambda_max: 0.5, t_f: 4.0, kind: sin2, t_i: 0.0}
physics: {T0: 1.0, gamma: 0.5, omega0: 1.0}
ensemble: {n: 17, seed: 99, workers: 3}
)";
  const SimConfig a = parse_config(kMinimal).config;
  const SimConfig b = parse_config(reordered).config;
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 64);
  SimConfig d = a;
  d.physics.gamma = 0.5000000001;
  CHECK(config_digest(d) != config_digest(a));
  CHECK(canonical_json(a).find("ensemble") == std::string::npos);
}

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto path = std::filesystem::temp_directory_path() / "qcal_sha_test.txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "abc";
  }
  CHECK(sha256_file(path) == sha256_hex("abc"));
  std::filesystem::remove(path);
}

TEST_CASE("output format names") {
  for (OutputFormat f : {OutputFormat::automatic, OutputFormat::text, OutputFormat::binary, OutputFormat::csv})
    CHECK(parse_output_format(to_string(f)) == f);
  CHECK_THROWS(parse_output_format("xml"));
}

TEST_CASE("SI units convert to natural units") {
  const double hbar = 1.054571817e-34;
  const double kB = 1.380649e-23;
  const double eV = 1.602176634e-19;
  const double w = 2 * std::numbers::pi * 5e9;
  const std::string text = R"(
units: si
physics:
  omega0: 31415926535.897932
  gamma: 1.0e6
  T0: 0.05
  fermi_energy: 5.0
  electrons: 1.0e8
drive:
  kind: sin2
  t_i: 0.0
  t_f: 1.0e-6
  lambda_max: 1.0e8
phonon:
  sigma_ep: 2.0e-9
  T_p: 0.04
  exponent: 5
)";
  const SimConfig c = parse_config(text).config;
  const double E = hbar * w;
  CHECK(c.physics.omega0 == 1.0);
  CHECK(c.physics.gamma == doctest::Approx(1e6 / w).epsilon(1e-12));
  CHECK(c.physics.T0 == doctest::Approx(kB * 0.05 / E).epsilon(1e-12));
  CHECK(c.physics.kappa == doctest::Approx(4 * 5.0 * eV / (std::numbers::pi * std::numbers::pi * 1e8) / E).epsilon(1e-12));
  CHECK(c.t_f() == doctest::Approx(1e-6 * w).epsilon(1e-12));
  CHECK(c.drive.lambda_max() == doctest::Approx(1e8 / w).epsilon(1e-12));
  CHECK(c.phonon.T_p == doctest::Approx(kB * 0.04 / E).epsilon(1e-12));
  // d(T^2)/dt in natural units from P = Sigma (T_p^5 - T^5) watts.
  CHECK(c.phonon.sigma_ep == doctest::Approx(2e-9 * std::pow(E / kB, 5) / (E * w)).epsilon(1e-12));
}
