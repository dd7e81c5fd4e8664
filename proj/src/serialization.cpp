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

#include "qcal/serialization.hpp"

#include <array>
#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "qcal/config_io.hpp"
#include "qcal/errors.hpp"
#include "qcal/path_thermo.hpp"

namespace qcal {

static_assert(std::endian::native == std::endian::little,
              "binary trajectory format assumes a little-endian host");

namespace {

using Json = nlohmann::json;

constexpr std::array<char, 8> kMagic = {'Q', 'C', 'A', 'L', 'T', 'R', 'J', '\0'};

const char* direction_name(Direction d) {
  return d == Direction::forward ? "forward" : "reversed";
}

Direction parse_direction(const std::string& s) {
  if (s == "forward") return Direction::forward;
  if (s == "reversed") return Direction::reversed;
  throw IoError("unknown direction '" + s + "'");
}

Level parse_level(const std::string& s) {
  if (s == "up") return Level::up;
  if (s == "down") return Level::down;
  throw IoError("unknown level '" + s + "'");
}

Json state_json(const Vector2cd& v) {
  return {v(0).real(), v(0).imag(), v(1).real(), v(1).imag()};
}

Vector2cd state_from(const Json& j, std::size_t offset = 0) {
  return Vector2cd(Complex<double>(j.at(offset).get<double>(),
                                   j.at(offset + 1).get<double>()),
                   Complex<double>(j.at(offset + 2).get<double>(),
                                   j.at(offset + 3).get<double>()));
}

Json header_json(const TrajectorySet& set) {
  Json failures = Json::array();
  for (const auto& f : set.failures)
    failures.push_back({{"index", f.index},
                        {"seed", f.seed},
                        {"kind", f.kind},
                        {"message", f.message}});
  return {{"format", "qcal-trajectories"},
          {"version", kTrajectoryFormatVersion},
          {"config_digest", set.config_digest},
          {"direction", direction_name(set.direction)},
          {"base_seed", set.base_seed},
          {"n", set.size()},
          {"failures", failures}};
}

void read_header(const Json& h, TrajectorySet& set, std::uint64_t& n) {
  if (h.value("format", "") != "qcal-trajectories")
    throw IoError("not a qcal trajectory file");
  if (h.at("version").get<std::uint32_t>() != kTrajectoryFormatVersion)
    throw IoError("unsupported trajectory format version");
  set.config_digest = h.at("config_digest").get<std::string>();
  set.direction = parse_direction(h.at("direction").get<std::string>());
  set.base_seed = h.at("base_seed").get<std::uint64_t>();
  n = h.at("n").get<std::uint64_t>();
  for (const auto& f : h.at("failures"))
    set.failures.push_back({f.at("index").get<std::uint64_t>(),
                            f.at("seed").get<std::uint64_t>(),
                            f.at("kind").get<std::string>(),
                            f.at("message").get<std::string>()});
}

template <class T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
void put_column(std::ostream& out, const std::vector<T>& column) {
  out.write(reinterpret_cast<const char*>(column.data()),
            static_cast<std::streamsize>(column.size() * sizeof(T)));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw IoError("truncated binary trajectory file");
  return value;
}

// Guards allocation against corrupt counts.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 40;

template <class T>
std::vector<T> get_column(std::istream& in, std::uint64_t n) {
  if (n > kMaxCount) throw IoError("corrupt column length");
  std::vector<T> column(n);
  if (n && !in.read(reinterpret_cast<char*>(column.data()),
                    static_cast<std::streamsize>(n * sizeof(T))))
    throw IoError("truncated binary trajectory file");
  return column;
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1u << 24)) throw IoError("corrupt string length");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n)))
    throw IoError("truncated binary trajectory file");
  return s;
}

void check_offsets(const std::vector<std::uint64_t>& offsets,
                   std::uint64_t total) {
  if (offsets.front() != 0 || offsets.back() != total ||
      !std::is_sorted(offsets.begin(), offsets.end()))
    throw IoError("corrupt offset column");
}

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

void write_jsonl(std::ostream& out, const TrajectorySet& set) {
  out << header_json(set).dump() << '\n';
  for (const Trajectory& t : set.trajectories) {
    Json jumps = Json::array();
    for (const auto& j : t.jumps)
      jumps.push_back(
          {j.time, j.x, j.gap, j.temp_before, j.temp_after, j.rate});
    Json segments = Json::array();
    for (const auto& s : t.segments)
      segments.push_back({s.t_start, s.t_end, s.work});
    Json checkpoints = Json::array();
    for (const auto& c : t.checkpoints) {
      Json row = {c.time};
      for (const auto& v : state_json(c.state)) row.push_back(v);
      row.push_back(c.temperature);
      checkpoints.push_back(row);
    }
    const Json record = {{"seed", t.seed},
                         {"initial", to_string(t.initial_label)},
                         {"final", to_string(t.final_label)},
                         {"final_temperature", t.final_temperature},
                         {"final_state", state_json(t.final_state)},
                         {"jumps", jumps},
                         {"segments", segments},
                         {"checkpoints", checkpoints}};
    out << record.dump() << '\n';
  }
  if (!out) throw IoError("failed writing trajectory records");
}

TrajectorySet read_jsonl(std::istream& in) {
  TrajectorySet set;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file");
  std::uint64_t n = 0;
  try {
    read_header(Json::parse(line), set, n);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json r = Json::parse(line);
      Trajectory t;
      t.direction = set.direction;
      t.seed = r.at("seed").get<std::uint64_t>();
      t.initial_label = parse_level(r.at("initial").get<std::string>());
      t.final_label = parse_level(r.at("final").get<std::string>());
      t.final_temperature = r.at("final_temperature").get<double>();
      t.final_state = state_from(r.at("final_state"));
      for (const auto& j : r.at("jumps"))
        t.jumps.push_back({j.at(0).get<double>(), j.at(1).get<int>(),
                           j.at(2).get<double>(), j.at(3).get<double>(),
                           j.at(4).get<double>(), j.at(5).get<double>()});
      for (const auto& s : r.at("segments"))
        t.segments.push_back({s.at(0).get<double>(), s.at(1).get<double>(),
                              s.at(2).get<double>()});
      for (const auto& c : r.at("checkpoints"))
        t.checkpoints.push_back(
            {c.at(0).get<double>(), state_from(c, 1), c.at(5).get<double>()});
      set.trajectories.push_back(std::move(t));
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed trajectory record: ") + e.what());
  }
  if (set.size() != n)
    throw IoError("trajectory file holds " + std::to_string(set.size()) +
                  " records, header says " + std::to_string(n));
  return set;
}

void write_binary(std::ostream& out, const TrajectorySet& set) {
  const std::size_t n = set.size();
  std::vector<std::uint8_t> initial, final;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_temp, final_state;
  std::vector<std::uint64_t> jump_off{0}, seg_off{0}, cp_off{0};
  std::vector<double> j_time, j_gap, j_tb, j_ta, j_rate;
  std::vector<std::int8_t> j_x;
  std::vector<double> s_start, s_end, s_work;
  std::vector<double> c_time, c_state, c_temp;
  for (const Trajectory& t : set.trajectories) {
    initial.push_back(static_cast<std::uint8_t>(index_of(t.initial_label)));
    final.push_back(static_cast<std::uint8_t>(index_of(t.final_label)));
    seeds.push_back(t.seed);
    final_temp.push_back(t.final_temperature);
    for (int k = 0; k < 2; ++k) {
      final_state.push_back(t.final_state(k).real());
      final_state.push_back(t.final_state(k).imag());
    }
    for (const auto& j : t.jumps) {
      j_time.push_back(j.time);
      j_x.push_back(static_cast<std::int8_t>(j.x));
      j_gap.push_back(j.gap);
      j_tb.push_back(j.temp_before);
      j_ta.push_back(j.temp_after);
      j_rate.push_back(j.rate);
    }
    for (const auto& s : t.segments) {
      s_start.push_back(s.t_start);
      s_end.push_back(s.t_end);
      s_work.push_back(s.work);
    }
    for (const auto& c : t.checkpoints) {
      c_time.push_back(c.time);
      for (int k = 0; k < 2; ++k) {
        c_state.push_back(c.state(k).real());
        c_state.push_back(c.state(k).imag());
      }
      c_temp.push_back(c.temperature);
    }
    jump_off.push_back(j_time.size());
    seg_off.push_back(s_start.size());
    cp_off.push_back(c_time.size());
  }

  out.write(kMagic.data(), kMagic.size());
  put(out, kTrajectoryFormatVersion);
  put_string(out, set.config_digest);
  put<std::uint8_t>(out, set.direction == Direction::forward ? 0 : 1);
  put<std::uint64_t>(out, set.base_seed);
  put<std::uint64_t>(out, n);
  put<std::uint64_t>(out, j_time.size());
  put<std::uint64_t>(out, s_start.size());
  put<std::uint64_t>(out, c_time.size());
  put<std::uint64_t>(out, set.failures.size());

  put_column(out, initial);
  put_column(out, final);
  put_column(out, seeds);
  put_column(out, final_temp);
  put_column(out, final_state);
  put_column(out, jump_off);
  put_column(out, seg_off);
  put_column(out, cp_off);
  put_column(out, j_time);
  put_column(out, j_x);
  put_column(out, j_gap);
  put_column(out, j_tb);
  put_column(out, j_ta);
  put_column(out, j_rate);
  put_column(out, s_start);
  put_column(out, s_end);
  put_column(out, s_work);
  put_column(out, c_time);
  put_column(out, c_state);
  put_column(out, c_temp);
  for (const auto& f : set.failures) {
    put<std::uint64_t>(out, f.index);
    put<std::uint64_t>(out, f.seed);
    put_string(out, f.kind);
    put_string(out, f.message);
  }
  if (!out) throw IoError("failed writing binary trajectory set");
}

TrajectorySet read_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw IoError("not a binary qcal trajectory file");
  if (get<std::uint32_t>(in) != kTrajectoryFormatVersion)
    throw IoError("unsupported trajectory format version");
  TrajectorySet set;
  set.config_digest = get_string(in);
  set.direction = get<std::uint8_t>(in) == 0 ? Direction::forward
                                             : Direction::reversed;
  set.base_seed = get<std::uint64_t>(in);
  const auto n = get<std::uint64_t>(in);
  const auto nj = get<std::uint64_t>(in);
  const auto ns = get<std::uint64_t>(in);
  const auto nc = get<std::uint64_t>(in);
  const auto nf = get<std::uint64_t>(in);

  const auto initial = get_column<std::uint8_t>(in, n);
  const auto final = get_column<std::uint8_t>(in, n);
  const auto seeds = get_column<std::uint64_t>(in, n);
  const auto final_temp = get_column<double>(in, n);
  const auto final_state = get_column<double>(in, 4 * n);
  const auto jump_off = get_column<std::uint64_t>(in, n + 1);
  const auto seg_off = get_column<std::uint64_t>(in, n + 1);
  const auto cp_off = get_column<std::uint64_t>(in, n + 1);
  check_offsets(jump_off, nj);
  check_offsets(seg_off, ns);
  check_offsets(cp_off, nc);
  const auto j_time = get_column<double>(in, nj);
  const auto j_x = get_column<std::int8_t>(in, nj);
  const auto j_gap = get_column<double>(in, nj);
  const auto j_tb = get_column<double>(in, nj);
  const auto j_ta = get_column<double>(in, nj);
  const auto j_rate = get_column<double>(in, nj);
  const auto s_start = get_column<double>(in, ns);
  const auto s_end = get_column<double>(in, ns);
  const auto s_work = get_column<double>(in, ns);
  const auto c_time = get_column<double>(in, nc);
  const auto c_state = get_column<double>(in, 4 * nc);
  const auto c_temp = get_column<double>(in, nc);

  auto state_at = [](const std::vector<double>& col, std::size_t k) {
    return Vector2cd(Complex<double>(col[4 * k], col[4 * k + 1]),
                     Complex<double>(col[4 * k + 2], col[4 * k + 3]));
  };
  set.trajectories.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Trajectory& t = set.trajectories[i];
    t.direction = set.direction;
    t.initial_label = initial[i] ? Level::up : Level::down;
    t.final_label = final[i] ? Level::up : Level::down;
    t.seed = seeds[i];
    t.final_temperature = final_temp[i];
    t.final_state = state_at(final_state, i);
    for (auto k = jump_off[i]; k < jump_off[i + 1]; ++k)
      t.jumps.push_back(
          {j_time[k], j_x[k], j_gap[k], j_tb[k], j_ta[k], j_rate[k]});
    for (auto k = seg_off[i]; k < seg_off[i + 1]; ++k)
      t.segments.push_back({s_start[k], s_end[k], s_work[k]});
    for (auto k = cp_off[i]; k < cp_off[i + 1]; ++k)
      t.checkpoints.push_back({c_time[k], state_at(c_state, k), c_temp[k]});
  }
  if (nf > kMaxCount) throw IoError("corrupt failure count");
  for (std::uint64_t k = 0; k < nf; ++k) {
    TrajectoryFailure f;
    f.index = get<std::uint64_t>(in);
    f.seed = get<std::uint64_t>(in);
    f.kind = get_string(in);
    f.message = get_string(in);
    set.failures.push_back(std::move(f));
  }
  return set;
}

void write_csv(std::ostream& out, const TrajectorySet& set,
               const SimConfig& config, const MeasurementModel& mm) {
  out << "index,seed,initial,final,jumps,W,Q_total,J,sigma,"
         "final_temperature\n";
  std::size_t index = 0;
  for (const Trajectory& t : set.trajectories) {
    const WorkAndEnergy we = work_and_energy(t, config.physics, config.drive);
    double J = 0, sigma = 0;
    if (set.direction == Direction::forward) {
      J = entropy_flux(t, config.physics, config.drive);
      const double pi = mm.initial.of(t.initial_label);
      const double pf = mm.final.of(t.final_label);
      sigma = pi > 0 && pf > 0 ? -std::log(pf) + std::log(pi) + J
                               : std::numeric_limits<double>::infinity();
    }
    out << index++ << ',' << t.seed << ',' << to_string(t.initial_label)
        << ',' << to_string(t.final_label) << ',' << t.jumps.size() << ','
        << format_double(we.W) << ',' << format_double(we.Q_total) << ','
        << format_double(J) << ',' << format_double(sigma) << ','
        << format_double(t.final_temperature) << '\n';
  }
  if (!out) throw IoError("failed writing CSV");
}

OutputFormat resolve_format(OutputFormat requested, std::size_t n) {
  if (requested != OutputFormat::automatic) return requested;
  return n > kBinaryThreshold ? OutputFormat::binary : OutputFormat::text;
}

std::string file_extension(OutputFormat format) {
  switch (format) {
    case OutputFormat::binary: return ".qtrj";
    case OutputFormat::csv: return ".csv";
    default: return ".jsonl";
  }
}

std::filesystem::path write_trajectory_file(const std::filesystem::path& dir,
                                            const std::string& stem,
                                            const TrajectorySet& set,
                                            OutputFormat format,
                                            const SimConfig& config,
                                            const MeasurementModel& mm) {
  format = resolve_format(format, set.size());
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto path = dir / (stem + file_extension(format));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  switch (format) {
    case OutputFormat::binary: write_binary(out, set); break;
    case OutputFormat::csv: write_csv(out, set, config, mm); break;
    default: write_jsonl(out, set); break;
  }
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
  return path;
}

TrajectorySet read_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  const bool binary = in.gcount() == 8 && magic == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in) : read_jsonl(in);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void add_file(RunManifest& manifest, const std::filesystem::path& path) {
  manifest.files.push_back({path.filename().string(), sha256_file(path),
                            std::filesystem::file_size(path)});
}

std::string manifest_json(const RunManifest& m) {
  Json files = Json::array();
  for (const auto& f : m.files)
    files.push_back(
        {{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  const Json j = {{"command", m.command},
                  {"config_digest", m.config_digest},
                  {"artifact_version", m.artifact_version},
                  {"base_seed", m.base_seed},
                  {"n", m.n},
                  {"failed", m.failed},
                  {"started_at", m.started_at},
                  {"finished_at", m.finished_at},
                  {"warnings", m.warnings},
                  {"files", files}};
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest_json(manifest);
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fr_report_json(const FrEstimate& e, std::uint64_t seed) {
  const Json j = {{"config_digest", e.config_digest},
                  {"base_seed", seed},
                  {"n", e.n},
                  {"failed", e.failed},
                  {"mean_exp_neg_sigma", e.mean_exp_neg_sigma},
                  {"std_error", e.std_error},
                  {"z", e.std_error > 0
                            ? (e.mean_exp_neg_sigma - 1) / e.std_error
                            : 0.0},
                  {"mean_sigma", e.mean_sigma},
                  {"sigma_std_error", e.sigma_std_error},
                  {"max_weight", e.max_weight},
                  {"final_reference",
                   {{"up", e.final_reference.up},
                    {"down", e.final_reference.down}}},
                  {"passed", e.passed}};
  return j.dump(2) + "\n";
}

std::string fr_report_csv(const FrEstimate& e, std::uint64_t seed) {
  std::ostringstream os;
  os << "config_digest,base_seed,n,failed,mean_exp_neg_sigma,std_error,"
        "mean_sigma,sigma_std_error,max_weight,p_f_up,passed\n";
  os << e.config_digest << ',' << seed << ',' << e.n << ',' << e.failed
     << ',' << format_double(e.mean_exp_neg_sigma) << ','
     << format_double(e.std_error) << ',' << format_double(e.mean_sigma)
     << ',' << format_double(e.sigma_std_error) << ','
     << format_double(e.max_weight) << ','
     << format_double(e.final_reference.up) << ','
     << (e.passed ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace qcal
