#include "photonstat/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "photonstat/error.hpp"

namespace photonstat::io {

namespace {

// ---- strict JSON helpers ----

void check_keys(const json& j, const char* what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidInput(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidInput(std::string(what) + ": unknown field '" + key + "'");
  }
}

double get_number(const json& j, const char* what, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw InvalidInput(std::string(what) + "." + key + ": expected a number");
  return v.get<double>();
}

std::uint64_t get_uint(const json& j, const char* what, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw InvalidInput(std::string(what) + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const char* what, const char* key, std::string fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) throw InvalidInput(std::string(what) + "." + key + ": expected a string");
  return v.get<std::string>();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---- CSV helpers ----

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = end + 1;
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InvalidInput("csv line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

long parse_int(std::string_view s, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput("csv line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  return v;
}

// Rows after an exact header, each with exactly `columns` fields.
std::vector<std::vector<std::string_view>> csv_rows(std::string_view text, std::string_view header,
                                                    std::size_t columns) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != header)
    throw InvalidInput("csv: expected header '" + std::string(header) + "'");
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_fields(lines[i]);
    if (f.size() != columns)
      throw InvalidInput("csv line " + std::to_string(i + 1) + ": expected " +
                         std::to_string(columns) + " fields");
    rows.push_back(std::move(f));
  }
  return rows;
}

double end_of(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  if (!a.empty()) m = std::max(m, a.back());
  if (!b.empty()) m = std::max(m, b.back());
  return std::nextafter(m, std::numeric_limits<double>::infinity());
}

constexpr char kMagic[8] = {'P', 'H', 'S', 'T', 'R', 'M', '0', '1'};

}  // namespace

// ---- JSON ----

json to_json(const EmitterParams& p) {
  json j;
  j["delta"] = p.delta;
  j["t1_a"] = p.t1_a;
  j["t1_b"] = p.t1_b;
  j["t2_star"] = number_or_null(p.t2_star);
  j["phi0"] = p.phi0;
  if (p.omega_center) j["omega_center"] = *p.omega_center;
  return j;
}

EmitterParams emitter_from_json(const json& j, EmitterParams p) {
  constexpr const char* w = "emitter";
  check_keys(j, w, {"delta", "t1_a", "t1_b", "t2_star", "phi0", "omega_center"});
  p.delta = get_number(j, w, "delta", p.delta);
  p.t1_a = get_number(j, w, "t1_a", p.t1_a);
  p.t1_b = get_number(j, w, "t1_b", p.t1_b);
  if (j.contains("t2_star") && j.at("t2_star").is_null())
    p.t2_star = std::numeric_limits<double>::infinity();
  else
    p.t2_star = get_number(j, w, "t2_star", p.t2_star);
  p.phi0 = get_number(j, w, "phi0", p.phi0);
  if (j.contains("omega_center")) p.omega_center = get_number(j, w, "omega_center", 0.0);
  p.validate();
  return p;
}

json to_json(const ExcitationPulse& p) {
  json j;
  j["rep_rate"] = p.rep_rate;
  j["pulse_fwhm"] = p.pulse_fwhm;
  j["spot_area"] = p.spot_area;
  j["transmittance"] = p.transmittance;
  j["impedance"] = p.impedance;
  j["dipole"] = p.dipole;
  j["power"] = p.power;
  return j;
}

ExcitationPulse pulse_from_json(const json& j, ExcitationPulse p) {
  constexpr const char* w = "pulse";
  check_keys(j, w,
             {"rep_rate", "pulse_fwhm", "spot_area", "transmittance", "impedance", "dipole", "power"});
  p.rep_rate = get_number(j, w, "rep_rate", p.rep_rate);
  p.pulse_fwhm = get_number(j, w, "pulse_fwhm", p.pulse_fwhm);
  p.spot_area = get_number(j, w, "spot_area", p.spot_area);
  p.transmittance = get_number(j, w, "transmittance", p.transmittance);
  p.impedance = get_number(j, w, "impedance", p.impedance);
  p.dipole = get_number(j, w, "dipole", p.dipole);
  p.power = get_number(j, w, "power", p.power);
  p.validate();
  return p;
}

json to_json(const ThermalModel& m) {
  json j;
  j["gamma0_per_ns"] = m.gamma0;
  j["alpha_K"] = m.alpha;
  j["gamma_sd_per_ns"] = m.gamma_sd;
  j["purcell"] = m.purcell;
  return j;
}

ThermalModel thermal_from_json(const json& j, ThermalModel m) {
  constexpr const char* w = "thermal";
  check_keys(j, w, {"gamma0_per_ns", "alpha_K", "gamma_sd_per_ns", "purcell"});
  m.gamma0 = get_number(j, w, "gamma0_per_ns", m.gamma0);
  m.alpha = get_number(j, w, "alpha_K", m.alpha);
  m.gamma_sd = get_number(j, w, "gamma_sd_per_ns", m.gamma_sd);
  m.purcell = get_number(j, w, "purcell", m.purcell);
  m.validate();
  return m;
}

json to_json(const IrfModel& irf) {
  json j;
  j["shape"] = irf.is_delta() ? "delta" : "gaussian";
  j["fwhm"] = irf.fwhm;
  return j;
}

IrfModel irf_from_json(const json& j, IrfModel irf) {
  constexpr const char* w = "irf";
  check_keys(j, w, {"shape", "fwhm"});
  const std::string shape = get_string(j, w, "shape", irf.is_delta() ? "delta" : "gaussian");
  if (shape == "gaussian")
    irf.shape = IrfModel::Shape::gaussian;
  else if (shape == "delta")
    irf.shape = IrfModel::Shape::delta;
  else
    throw InvalidInput("irf.shape: expected 'gaussian' or 'delta'");
  irf.fwhm = get_number(j, w, "fwhm", irf.fwhm);
  irf.validate();
  return irf;
}

json to_json(const PulseTrainSpec& t) {
  json j;
  j["period"] = t.period;
  j["double_pulse_delay"] = t.double_pulse_delay;
  j["n_side_peaks"] = t.n_side_peaks;
  return j;
}

PulseTrainSpec train_from_json(const json& j, PulseTrainSpec t) {
  constexpr const char* w = "train";
  check_keys(j, w, {"period", "double_pulse_delay", "n_side_peaks"});
  t.period = get_number(j, w, "period", t.period);
  t.double_pulse_delay = get_number(j, w, "double_pulse_delay", t.double_pulse_delay);
  const auto n = get_uint(j, w, "n_side_peaks", static_cast<std::uint64_t>(t.n_side_peaks));
  require(n <= 100000, "train.n_side_peaks: too large");
  t.n_side_peaks = static_cast<int>(n);
  t.validate();
  return t;
}

json to_json(const SimConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["n_pulses"] = c.n_pulses;
  j["emission_prob"] = c.emission_prob;
  j["double_emission_prob"] = c.double_emission_prob;
  j["train"] = to_json(c.train);
  j["irf"] = to_json(c.irf);
  j["profile"] = c.profile == EmissionProfile::three_level ? "three_level" : "exponential";
  j["chunk_pulses"] = c.chunk_pulses;
  return j;
}

SimConfig sim_config_from_json(const json& j, SimConfig c) {
  constexpr const char* w = "simulation";
  check_keys(j, w,
             {"seed", "n_pulses", "emission_prob", "double_emission_prob", "train", "irf", "profile",
              "chunk_pulses"});
  c.seed = get_uint(j, w, "seed", c.seed);
  c.n_pulses = get_uint(j, w, "n_pulses", c.n_pulses);
  c.emission_prob = get_number(j, w, "emission_prob", c.emission_prob);
  c.double_emission_prob = get_number(j, w, "double_emission_prob", c.double_emission_prob);
  if (j.contains("train")) c.train = train_from_json(j.at("train"), c.train);
  if (j.contains("irf")) c.irf = irf_from_json(j.at("irf"), c.irf);
  const std::string profile =
      get_string(j, w, "profile", c.profile == EmissionProfile::three_level ? "three_level" : "exponential");
  if (profile == "three_level")
    c.profile = EmissionProfile::three_level;
  else if (profile == "exponential")
    c.profile = EmissionProfile::exponential;
  else
    throw InvalidInput("simulation.profile: expected 'three_level' or 'exponential'");
  c.chunk_pulses = get_uint(j, w, "chunk_pulses", c.chunk_pulses);
  c.validate();
  return c;
}

json to_json(const HistogramShape& s) {
  json j;
  j["t_min"] = s.t_min;
  j["t_max"] = s.t_max;
  j["bin_width"] = s.bin_width;
  return j;
}

HistogramShape shape_from_json(const json& j, HistogramShape s) {
  constexpr const char* w = "histogram";
  check_keys(j, w, {"t_min", "t_max", "bin_width"});
  s.t_min = get_number(j, w, "t_min", s.t_min);
  s.t_max = get_number(j, w, "t_max", s.t_max);
  s.bin_width = get_number(j, w, "bin_width", s.bin_width);
  s.validate();
  return s;
}

// ---- digests and reports ----

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

InputDigest digest_file(const fs::path& path) {
  return {path.string(), sha256_hex(read_file(path))};
}

json fit_report(const FitResult& r, const std::vector<InputDigest>& inputs) {
  json j;
  j["model"] = r.model;
  j["statistic"] = r.statistic;
  json params = json::object(), errors = json::object();
  for (const auto& [name, est] : r.parameters) {
    params[name] = number_or_null(est.value);
    errors[name] = number_or_null(est.error);
  }
  j["parameters"] = params;
  j["errors"] = errors;
  j["free_parameters"] = r.free_parameters;
  j["nll"] = number_or_null(r.objective);
  j["n_points"] = r.n_points;
  j["converged"] = r.converged;
  j["low_confidence"] = r.low_confidence;
  j["seed"] = r.seed;
  j["starts"] = r.starts;
  j["evaluations"] = r.evaluations;
  json in = json::array();
  for (const auto& d : inputs) in.push_back({{"path", d.path}, {"sha256", d.sha256}});
  j["inputs"] = in;
  return j;
}

// ---- files ----

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericalError("format_number failed");
  return std::string(buf, ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

json read_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput("'" + path.string() + "': " + e.what());
  }
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path.string() + "'");
  }
}

// ---- CSV ----

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += format_number(r[i]);
    }
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_center_ns,counts\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out += format_number(h.shape.center(i));
    out += ',';
    out += format_number(h.counts[i]);
    out += '\n';
  }
  return out;
}

Histogram parse_histogram_csv(std::string_view text) {
  const auto rows = csv_rows(text, "bin_center_ns,counts", 2);
  require(rows.size() >= 2, "histogram csv: need at least two bins");
  std::vector<double> centers, counts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    centers.push_back(parse_double(rows[i][0], i + 2));
    counts.push_back(parse_double(rows[i][1], i + 2));
    require(counts.back() >= 0.0, "histogram csv: negative count");
  }
  const double w = (centers.back() - centers.front()) / static_cast<double>(centers.size() - 1);
  require(w > 0.0, "histogram csv: bin centers must increase");
  for (std::size_t i = 1; i < centers.size(); ++i)
    require(std::abs(centers[i] - centers[i - 1] - w) <= 1e-6 * w,
            "histogram csv: bins must be uniform");
  Histogram h;
  h.shape = {centers.front() - 0.5 * w, centers.back() + 0.5 * w, w};
  h.counts = std::move(counts);
  h.validate();
  return h;
}

Histogram read_histogram_csv(const fs::path& path) { return parse_histogram_csv(read_file(path)); }

std::string timestamps_csv(const TimestampStream& a, const TimestampStream& b) {
  std::string out = "channel,time_ns\n";
  std::size_t i = 0, j = 0;
  auto row = [&](int ch, double t) {
    out += ch ? '1' : '0';
    out += ',';
    out += format_number(t);
    out += '\n';
  };
  const TimestampStream& s0 = a.channel <= b.channel ? a : b;
  const TimestampStream& s1 = a.channel <= b.channel ? b : a;
  while (i < s0.times.size() || j < s1.times.size()) {
    if (j == s1.times.size() || (i < s0.times.size() && s0.times[i] <= s1.times[j]))
      row(s0.channel, s0.times[i++]);
    else
      row(s1.channel, s1.times[j++]);
  }
  return out;
}

std::array<TimestampStream, 2> parse_timestamps_csv(std::string_view text) {
  std::array<TimestampStream, 2> s;
  s[0].channel = 0;
  s[1].channel = 1;
  double last = -std::numeric_limits<double>::infinity();
  std::size_t line = 2;
  for (const auto& r : csv_rows(text, "channel,time_ns", 2)) {
    const long ch = parse_int(r[0], line);
    require(ch == 0 || ch == 1, "timestamp csv line " + std::to_string(line) + ": channel must be 0 or 1");
    const double t = parse_double(r[1], line);
    require(t >= 0.0, "timestamp csv line " + std::to_string(line) + ": negative time");
    require(t >= last, "timestamp csv line " + std::to_string(line) + ": rows not sorted by time");
    last = t;
    s[static_cast<std::size_t>(ch)].times.push_back(t);
    ++line;
  }
  const double d = end_of(s[0].times, s[1].times);
  for (auto& x : s) {
    x.meta.duration = d;
    x.meta.source = "csv";
  }
  return s;
}

std::string timestamps_binary(const TimestampStream& s) {
  std::string out(kMagic, sizeof kMagic);
  out.reserve(8 + 8 * s.times.size());
  for (double t : s.times) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(t);
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
  }
  return out;
}

TimestampStream parse_timestamps_binary(std::string_view bytes, int channel) {
  require(channel == 0 || channel == 1, "timestamp binary: channel must be 0 or 1");
  require(bytes.size() >= 8 && std::memcmp(bytes.data(), kMagic, 8) == 0,
          "timestamp binary: missing PHSTRM01 magic");
  require((bytes.size() - 8) % 8 == 0, "timestamp binary: truncated record");
  TimestampStream s;
  s.channel = channel;
  s.meta.source = "binary";
  const std::size_t n = (bytes.size() - 8) / 8;
  s.times.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + 8 * i + k])) << (8 * k);
    s.times[i] = std::bit_cast<double>(bits);
    require(std::isfinite(s.times[i]) && s.times[i] >= 0.0, "timestamp binary: bad time");
    require(i == 0 || s.times[i] >= s.times[i - 1], "timestamp binary: times not sorted");
  }
  s.meta.duration = end_of(s.times, {});
  return s;
}

std::string array_csv(const ArrayMap& m) {
  std::string out = "row,col,lambda_nm\n";
  for (const auto& s : m.sites) {
    out += std::to_string(s.row) + ',' + std::to_string(s.col) + ',';
    if (s.lambda_nm) out += format_number(*s.lambda_nm);
    out += '\n';
  }
  return out;
}

ArrayMap parse_array_csv(std::string_view text) {
  ArrayMap m;
  std::size_t line = 2;
  for (const auto& r : csv_rows(text, "row,col,lambda_nm", 3)) {
    ArraySite s;
    s.row = static_cast<int>(parse_int(r[0], line));
    s.col = static_cast<int>(parse_int(r[1], line));
    if (!r[2].empty()) s.lambda_nm = parse_double(r[2], line);
    m.rows = std::max(m.rows, s.row + 1);
    m.cols = std::max(m.cols, s.col + 1);
    m.sites.push_back(s);
    ++line;
  }
  m.validate();
  return m;
}

std::vector<TemperaturePoint> parse_visibility_csv(std::string_view text) {
  std::vector<TemperaturePoint> out;
  std::size_t line = 2;
  for (const auto& r : csv_rows(text, "T_K,V", 2)) {
    out.push_back({parse_double(r[0], line), parse_double(r[1], line)});
    ++line;
  }
  return out;
}

std::vector<FringePoint> parse_fringe_csv(std::string_view text) {
  std::vector<FringePoint> out;
  std::size_t line = 2;
  for (const auto& r : csv_rows(text, "tau_ns,contrast", 2)) {
    out.push_back({parse_double(r[0], line), parse_double(r[1], line)});
    ++line;
  }
  return out;
}

std::vector<RabiPoint> parse_rabi_csv(std::string_view text) {
  std::vector<RabiPoint> out;
  std::size_t line = 2;
  for (const auto& r : csv_rows(text, "power_nW,intensity", 2)) {
    const double p = parse_double(r[0], line);
    require(p >= 0.0, "rabi csv line " + std::to_string(line) + ": negative power");
    out.push_back({std::sqrt(p), parse_double(r[1], line)});
    ++line;
  }
  return out;
}

}  // namespace photonstat::io
