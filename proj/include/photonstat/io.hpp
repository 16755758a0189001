#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "photonstat/array_analysis.hpp"
#include "photonstat/emitter.hpp"
#include "photonstat/estimation.hpp"
#include "photonstat/histogram.hpp"
#include "photonstat/interferometry.hpp"
#include "photonstat/photostream.hpp"
#include "photonstat/thermal.hpp"

namespace photonstat::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Strict JSON mapping. Readers reject unknown keys and wrong types (InvalidInput);
// missing keys keep their defaults. Readers start from `base` so a partial
// object can override an existing value.
json to_json(const EmitterParams& p);
json to_json(const ExcitationPulse& p);
json to_json(const ThermalModel& m);
json to_json(const IrfModel& irf);
json to_json(const PulseTrainSpec& t);
json to_json(const SimConfig& c);
json to_json(const HistogramShape& s);

EmitterParams emitter_from_json(const json& j, EmitterParams base = {});
ExcitationPulse pulse_from_json(const json& j, ExcitationPulse base = {});
ThermalModel thermal_from_json(const json& j, ThermalModel base = {});
IrfModel irf_from_json(const json& j, IrfModel base = {});
PulseTrainSpec train_from_json(const json& j, PulseTrainSpec base = {});
SimConfig sim_config_from_json(const json& j, SimConfig base = {});
HistogramShape shape_from_json(const json& j, HistogramShape base = {});

struct InputDigest {
  std::string path;
  std::string sha256;
};

std::string sha256_hex(std::string_view bytes);
InputDigest digest_file(const fs::path& path);

json fit_report(const FitResult& r, const std::vector<InputDigest>& inputs);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double x);

std::string read_file(const fs::path& path);
json read_json_file(const fs::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view content);

// CSV formats. Headers are checked exactly; LF line endings.
std::string histogram_csv(const Histogram& h);
Histogram parse_histogram_csv(std::string_view text);
Histogram read_histogram_csv(const fs::path& path);

/// `channel,time_ns`, rows sorted by time (ties by channel).
std::string timestamps_csv(const TimestampStream& a, const TimestampStream& b);
std::array<TimestampStream, 2> parse_timestamps_csv(std::string_view text);

/// 8-byte magic `PHSTRM01` then little-endian float64 times, one channel per file.
std::string timestamps_binary(const TimestampStream& s);
TimestampStream parse_timestamps_binary(std::string_view bytes, int channel);


std::string array_csv(const ArrayMap& m);
ArrayMap parse_array_csv(std::string_view text);

std::vector<TemperaturePoint> parse_visibility_csv(std::string_view text);  ///< T_K,V
std::vector<FringePoint> parse_fringe_csv(std::string_view text);           ///< tau_ns,contrast
/// power_nW,intensity; converted to √P for the fit.
std::vector<RabiPoint> parse_rabi_csv(std::string_view text);

/// Generic numeric table writer: header line then rows.
std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace photonstat::io
