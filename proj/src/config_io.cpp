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

#include "qcal/config_io.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "qcal/errors.hpp"

namespace qcal {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw ConfigError(what);
  throw ConfigError(what, mark.line + 1, mark.column + 1);
}

void require_map(const YAML::Node& node, const std::string& name) {
  if (!node.IsMap()) fail_at(node, "'" + name + "' must be a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& section,
                    std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      const std::string where = section.empty() ? "" : " in '" + section + "'";
      fail_at(kv.first, "unknown key '" + key + "'" + where);
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail_at(node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, "'" + key + "' has the wrong type");
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out) {
  if (const YAML::Node node = map[key]) out = scalar<T>(node, key);
}

std::vector<double> sequence(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) fail_at(node, "'" + key + "' must be a sequence");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(scalar<double>(item, key));
  return out;
}

Distribution parse_distribution(const YAML::Node& node, const std::string& key,
                                const PhysicalParams& physics) {
  if (node.IsScalar()) {
    const auto name = node.as<std::string>();
    if (name == "uniform") return Distribution::uniform();
    if (name == "up") return Distribution::certain(Level::up);
    if (name == "down") return Distribution::certain(Level::down);
    if (name == "thermal") {
      if (!(physics.T0 > 0))
        fail_at(node, "'thermal' distribution needs T0 > 0");
      const double p_up = 1.0 / (std::exp(physics.omega0 / physics.T0) + 1.0);
      return {p_up, 1.0 - p_up};
    }
    fail_at(node, "'" + key +
                      "' must be uniform, up, down, thermal or {up, down}");
  }
  require_map(node, key);
  reject_unknown(node, key, {"up", "down"});
  if (!node["up"] || !node["down"])
    fail_at(node, "'" + key + "' needs both 'up' and 'down'");
  return {scalar<double>(node["up"], "up"), scalar<double>(node["down"], "down")};
}

FinalSource parse_final_source(const YAML::Node& node) {
  const auto name = scalar<std::string>(node, "final_source");
  if (name == "automatic") return FinalSource::automatic;
  if (name == "configured") return FinalSource::configured;
  if (name == "empirical") return FinalSource::empirical;
  if (name == "oracle") return FinalSource::oracle;
  fail_at(node,
          "'final_source' must be automatic, configured, empirical or oracle");
}

const char* to_string(FinalSource source) {
  switch (source) {
    case FinalSource::automatic: return "automatic";
    case FinalSource::configured: return "configured";
    case FinalSource::empirical: return "empirical";
    case FinalSource::oracle: return "oracle";
  }
  return "automatic";
}

/// Factors taking SI inputs to natural units with hbar omega0 as the energy
/// unit and 1/omega0 as the time unit. All ones for natural-unit configs.
struct UnitScale {
  double time{1};
  double rate{1};
  double temperature{1};
  /// Energy per unit, J (SI mode only).
  double energy{1};
};

constexpr double kHbar = 1.054571817e-34;      // J s
constexpr double kBoltzmann = 1.380649e-23;    // J / K
constexpr double kElectronVolt = 1.602176634e-19;  // J

DriveProtocol parse_drive(const YAML::Node& node, const UnitScale& u) {
  require_map(node, "drive");
  reject_unknown(node, "drive",
                 {"kind", "t_i", "t_f", "lambda_max", "times", "values"});
  const std::string kind =
      node["kind"] ? scalar<std::string>(node["kind"], "kind") : "undriven";
  auto need = [&](const char* key) {
    if (!node[key]) fail_at(node, std::string("drive needs '") + key + "'");
    return node[key];
  };
  try {
    if (kind == "undriven" || kind == "sin2") {
      if (node["times"] || node["values"])
        fail_at(node, "'times'/'values' only apply to a tabulated drive");
      const double t_i = scalar<double>(need("t_i"), "t_i") * u.time;
      const double t_f = scalar<double>(need("t_f"), "t_f") * u.time;
      if (kind == "undriven") {
        if (node["lambda_max"] &&
            scalar<double>(node["lambda_max"], "lambda_max") != 0)
          fail_at(node["lambda_max"], "an undriven protocol has lambda_max 0");
        return DriveProtocol::undriven(t_i, t_f);
      }
      return DriveProtocol::sin2(
          t_i, t_f, scalar<double>(need("lambda_max"), "lambda_max") * u.rate);
    }
    if (kind == "tabulated") {
      if (node["t_i"] || node["t_f"] || node["lambda_max"])
        fail_at(node, "a tabulated drive takes its horizon from 'times'");
      std::vector<double> times = sequence(need("times"), "times");
      std::vector<double> values = sequence(need("values"), "values");
      for (double& t : times) t *= u.time;
      for (double& v : values) v *= u.rate;
      return DriveProtocol::tabulated(std::move(times), std::move(values));
    }
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
  fail_at(node["kind"], "drive kind must be undriven, sin2 or tabulated");
}

void parse_document(const YAML::Node& root, SimConfig& c) {
  if (root.IsNull()) throw ConfigError("empty configuration");
  require_map(root, "configuration");
  reject_unknown(root, "",
                 {"units", "physics", "drive", "measurement",
                  "reversed_preparation", "phonon", "numerics", "ensemble"});
  bool si = false;
  if (const YAML::Node units = root["units"]) {
    const auto name = scalar<std::string>(units, "units");
    if (name != "natural" && name != "si")
      fail_at(units, "'units' must be natural or si");
    si = name == "si";
  }

  const YAML::Node physics = root["physics"];
  if (!physics) throw ConfigError("missing 'physics' section");
  require_map(physics, "physics");
  if (si) {
    reject_unknown(physics, "physics",
                   {"omega0", "gamma", "T0", "fermi_energy", "electrons",
                    "emission_only"});
  } else {
    reject_unknown(physics, "physics",
                   {"omega0", "gamma", "kappa", "T0", "emission_only"});
  }
  for (const char* key : {"omega0", "gamma", "T0"})
    if (!physics[key])
      fail_at(physics, std::string("physics needs '") + key + "'");
  read(physics, "omega0", c.physics.omega0);
  read(physics, "gamma", c.physics.gamma);
  read(physics, "kappa", c.physics.kappa);
  read(physics, "T0", c.physics.T0);
  read(physics, "emission_only", c.physics.emission_only);

  UnitScale u;
  if (si) {
    // omega0 [rad/s], gamma [1/s], T0 [K], fermi_energy [eV]; the calorimeter
    // holds `electrons` conduction electrons (Sommerfeld: E = pi^2 N T^2 / 4 E_F).
    if (!(c.physics.omega0 > 0))
      fail_at(physics["omega0"], "omega0 must be positive");
    u.time = c.physics.omega0;
    u.rate = 1.0 / c.physics.omega0;
    u.energy = kHbar * c.physics.omega0;
    u.temperature = kBoltzmann / u.energy;
    c.physics.gamma *= u.rate;
    c.physics.T0 *= u.temperature;
    c.physics.omega0 = 1.0;
    const bool has_ef = static_cast<bool>(physics["fermi_energy"]);
    if (has_ef != static_cast<bool>(physics["electrons"]))
      fail_at(physics, "SI calorimeter needs both 'fermi_energy' and 'electrons'");
    if (has_ef) {
      const double ef = scalar<double>(physics["fermi_energy"], "fermi_energy");
      const double n = scalar<double>(physics["electrons"], "electrons");
      if (!(ef > 0) || !(n > 0))
        fail_at(physics, "fermi_energy and electrons must be positive");
      c.physics.kappa =
          4.0 * ef * kElectronVolt / (std::numbers::pi * std::numbers::pi * n) /
          u.energy;
    }
  }

  if (!root["drive"]) throw ConfigError("missing 'drive' section");
  c.drive = parse_drive(root["drive"], u);

  if (const YAML::Node m = root["measurement"]) {
    require_map(m, "measurement");
    reject_unknown(m, "measurement", {"initial", "final", "final_source"});
    if (m["initial"])
      c.measurement.initial = parse_distribution(m["initial"], "initial",
                                                 c.physics);
    if (m["final"]) {
      c.measurement.final = parse_distribution(m["final"], "final", c.physics);
      c.measurement.final_source = FinalSource::configured;
    }
    if (m["final_source"])
      c.measurement.final_source = parse_final_source(m["final_source"]);
  }
  if (const YAML::Node r = root["reversed_preparation"])
    c.reversed_preparation =
        parse_distribution(r, "reversed_preparation", c.physics);

  if (const YAML::Node p = root["phonon"]) {
    require_map(p, "phonon");
    reject_unknown(p, "phonon", {"enabled", "sigma_ep", "T_p", "exponent"});
    c.phonon.enabled = true;
    read(p, "enabled", c.phonon.enabled);
    read(p, "sigma_ep", c.phonon.sigma_ep);
    read(p, "T_p", c.phonon.T_p);
    read(p, "exponent", c.phonon.exponent);
    if (si) {
      // T_p [K], sigma_ep [W / K^n]
      c.phonon.T_p *= u.temperature;
      c.phonon.sigma_ep *= std::pow(1.0 / u.temperature, c.phonon.exponent) /
                           (u.energy * u.time);
    }
  }
  if (const YAML::Node n = root["numerics"]) {
    require_map(n, "numerics");
    reject_unknown(n, "numerics",
                   {"rel_tol", "abs_tol", "jump_time_tol", "checkpoints"});
    read(n, "rel_tol", c.numerics.rel_tol);
    read(n, "abs_tol", c.numerics.abs_tol);
    read(n, "jump_time_tol", c.numerics.jump_time_tol);
    read(n, "checkpoints", c.numerics.checkpoints);
  }
  if (const YAML::Node e = root["ensemble"]) {
    require_map(e, "ensemble");
    reject_unknown(e, "ensemble",
                   {"n", "seed", "workers", "format", "out_dir",
                    "marginal_pass_n", "fail_fast"});
    read(e, "n", c.ensemble.n);
    read(e, "seed", c.ensemble.seed);
    read(e, "workers", c.ensemble.workers);
    read(e, "out_dir", c.ensemble.out_dir);
    read(e, "marginal_pass_n", c.ensemble.marginal_pass_n);
    read(e, "fail_fast", c.ensemble.fail_fast);
    if (e["format"]) {
      try {
        c.ensemble.format =
            parse_output_format(scalar<std::string>(e["format"], "format"));
      } catch (const ConfigError& err) {
        fail_at(e["format"], err.what());
      }
    }
  }
}

Json distribution_json(const Distribution& d) {
  return {{"up", d.up}, {"down", d.down}};
}

void emit_distribution(YAML::Emitter& out, const Distribution& d) {
  out << YAML::Flow << YAML::BeginMap << YAML::Key << "up" << YAML::Value
      << d.up << YAML::Key << "down" << YAML::Value << d.down
      << YAML::EndMap;
}

std::string hex(const unsigned char* bytes, unsigned int n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (unsigned int k = 0; k < n; ++k) {
    out.push_back(digits[bytes[k] >> 4]);
    out.push_back(digits[bytes[k] & 0xf]);
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("SHA-256 initialization failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1)
      throw Error("SHA-256 update failed");
  }
  std::string finish() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1)
      throw Error("SHA-256 finalization failed");
    return hex(md.data(), len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::automatic: return "auto";
    case OutputFormat::text: return "text";
    case OutputFormat::binary: return "binary";
    case OutputFormat::csv: return "csv";
  }
  return "auto";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "auto") return OutputFormat::automatic;
  if (name == "text") return OutputFormat::text;
  if (name == "binary") return OutputFormat::binary;
  if (name == "csv") return OutputFormat::csv;
  throw ConfigError("format must be auto, text, binary or csv, not '" +
                    std::string(name) + "'");
}

ParsedConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  ParsedConfig out;
  try {
    parse_document(root, out.config);
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1,
                      e.mark.column + 1);
  }
  out.warnings = validate(out.config);
  return out;
}

ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const SimConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "omega0" << YAML::Value << c.physics.omega0;
  out << YAML::Key << "gamma" << YAML::Value << c.physics.gamma;
  out << YAML::Key << "kappa" << YAML::Value << c.physics.kappa;
  out << YAML::Key << "T0" << YAML::Value << c.physics.T0;
  out << YAML::Key << "emission_only" << YAML::Value
      << c.physics.emission_only;
  out << YAML::EndMap;

  out << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
  if (c.drive.kind() == DriveProtocol::Kind::tabulated) {
    out << YAML::Key << "kind" << YAML::Value << "tabulated";
    out << YAML::Key << "times" << YAML::Value << YAML::Flow
        << c.drive.table_times();
    out << YAML::Key << "values" << YAML::Value << YAML::Flow
        << c.drive.table_values();
  } else {
    out << YAML::Key << "kind" << YAML::Value
        << (c.drive.is_undriven() ? "undriven" : "sin2");
    out << YAML::Key << "t_i" << YAML::Value << c.drive.t_i();
    out << YAML::Key << "t_f" << YAML::Value << c.drive.t_f();
    if (!c.drive.is_undriven())
      out << YAML::Key << "lambda_max" << YAML::Value << c.drive.lambda_max();
  }
  out << YAML::EndMap;

  out << YAML::Key << "measurement" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "initial" << YAML::Value;
  emit_distribution(out, c.measurement.initial);
  out << YAML::Key << "final" << YAML::Value;
  emit_distribution(out, c.measurement.final);
  out << YAML::Key << "final_source" << YAML::Value
      << to_string(c.measurement.final_source);
  out << YAML::EndMap;

  if (c.reversed_preparation) {
    out << YAML::Key << "reversed_preparation" << YAML::Value;
    emit_distribution(out, *c.reversed_preparation);
  }

  out << YAML::Key << "phonon" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << c.phonon.enabled;
  out << YAML::Key << "sigma_ep" << YAML::Value << c.phonon.sigma_ep;
  out << YAML::Key << "T_p" << YAML::Value << c.phonon.T_p;
  out << YAML::Key << "exponent" << YAML::Value << c.phonon.exponent;
  out << YAML::EndMap;

  out << YAML::Key << "numerics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rel_tol" << YAML::Value << c.numerics.rel_tol;
  out << YAML::Key << "abs_tol" << YAML::Value << c.numerics.abs_tol;
  out << YAML::Key << "jump_time_tol" << YAML::Value
      << c.numerics.jump_time_tol;
  out << YAML::Key << "checkpoints" << YAML::Value << c.numerics.checkpoints;
  out << YAML::EndMap;

  out << YAML::Key << "ensemble" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n" << YAML::Value << c.ensemble.n;
  out << YAML::Key << "seed" << YAML::Value << c.ensemble.seed;
  out << YAML::Key << "workers" << YAML::Value << c.ensemble.workers;
  out << YAML::Key << "format" << YAML::Value << to_string(c.ensemble.format);
  out << YAML::Key << "out_dir" << YAML::Value << c.ensemble.out_dir;
  out << YAML::Key << "marginal_pass_n" << YAML::Value
      << c.ensemble.marginal_pass_n;
  out << YAML::Key << "fail_fast" << YAML::Value << c.ensemble.fail_fast;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string canonical_json(const SimConfig& c) {
  Json j;
  j["physics"] = {{"omega0", c.physics.omega0},
                  {"gamma", c.physics.gamma},
                  {"kappa", c.physics.kappa},
                  {"T0", c.physics.T0},
                  {"emission_only", c.physics.emission_only}};
  Json drive = {{"t_i", c.drive.t_i()}, {"t_f", c.drive.t_f()}};
  if (c.drive.kind() == DriveProtocol::Kind::tabulated) {
    drive["kind"] = "tabulated";
    drive["times"] = c.drive.table_times();
    drive["values"] = c.drive.table_values();
  } else {
    drive["kind"] = c.drive.is_undriven() ? "undriven" : "sin2";
    drive["lambda_max"] = c.drive.lambda_max();
  }
  j["drive"] = drive;
  j["measurement"] = {{"initial", distribution_json(c.measurement.initial)},
                      {"final", distribution_json(c.measurement.final)},
                      {"final_source", to_string(c.measurement.final_source)}};
  j["reversed_preparation"] = distribution_json(c.reversed_initial());
  j["phonon"] = {{"enabled", c.phonon.enabled},
                 {"sigma_ep", c.phonon.sigma_ep},
                 {"T_p", c.phonon.T_p},
                 {"exponent", c.phonon.exponent}};
  j["numerics"] = {{"rel_tol", c.numerics.rel_tol},
                   {"abs_tol", c.numerics.abs_tol},
                   {"jump_time_tol", c.numerics.jump_time_tol},
                   {"checkpoints", c.numerics.checkpoints}};
  return j.dump();
}

std::string config_digest(const SimConfig& config) {
  return sha256_hex(canonical_json(config));
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.finish();
}

}  // namespace qcal
