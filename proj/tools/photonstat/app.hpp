#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonstat/emitter.hpp"
#include "photonstat/estimation.hpp"
#include "photonstat/interferometry.hpp"
#include "photonstat/io.hpp"
#include "photonstat/photostream.hpp"
#include "photonstat/thermal.hpp"

namespace photonstat::cli {

using io::json;
namespace fs = std::filesystem;

struct FitSettings {
  int starts = 16;
  FitStatistic statistic = FitStatistic::poisson;
  G2Method method = G2Method::area_ratio;
  bool shared_amplitude = true;
  bool fit_background = true;
  bool damping = true;
  bool equal_lifetimes = true;
};

/// Everything a command can read. Built from defaults, then the config file,
/// then command-line flags.
struct Settings {
  std::uint64_t seed = 1;
  fs::path out_dir = "out";
  EmitterParams emitter = EmitterParams::equal_lifetime(0.35, 6.4, 0.58);
  ExcitationPulse pulse;
  SimConfig sim;
  ThermalModel thermal;
  IrfModel irf;  ///< per-detector response
  PulseTrainSpec train{1000.0 / 78.0, 2.0, 3};
  HistogramShape histogram{-50.0, 50.0, 0.05};
  FitSettings fit;
};

/// Applies a config document on top of `s`. Unknown keys are rejected.
void apply_config(Settings& s, const json& config);
json settings_json(const Settings& s);

/// Raised by a reproduce recipe whose self-check fails (exit 5).
struct RecipeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Run {
 public:
  explicit Run(Settings settings) : s(std::move(settings)) {}

  Settings s;
  json results = json::object();
  std::vector<std::string> outputs;

  /// Atomic write of `content` to out_dir/relative, creating directories.
  void write(const fs::path& relative, std::string_view content);
  void write_json(const fs::path& relative, const json& j) { write(relative, j.dump(2) + "\n"); }
};

// Command-specific flags. Unset optionals leave the settings untouched.
struct ModelFlags {
  std::string curve = "trpl";
  bool with_irf = false;
  std::optional<double> t_min, t_max, dt, g2, tau_qd;
};

struct SimulateFlags {
  std::string kind = "hbt";
  std::string format = "csv";
  std::optional<double> g2;
  std::size_t pairs = 100000;
};

struct CorrelateFlags {
  std::optional<std::string> input, ch0, ch1;
};

struct FitFlags {
  std::string model;
  std::optional<std::string> input, par, perp;
};

struct VisibilityFlags {
  std::string input;
  std::optional<double> g2;
  std::vector<double> temps{4.0};
  bool free_alpha = false;
};

struct ArrayFlags {
  std::string input;
  double window_ueV = 250.0;
  double stark_rate = 1.0;
};

struct BudgetFlags {
  EfficiencyBudget budget;
};

void cmd_model(Run& run, const ModelFlags& f);
void cmd_simulate(Run& run, const SimulateFlags& f);
void cmd_correlate(Run& run, const CorrelateFlags& f);
void cmd_fit(Run& run, const FitFlags& f);
void cmd_visibility(Run& run, const VisibilityFlags& f);
void cmd_array(Run& run, const ArrayFlags& f);
void cmd_budget(Run& run, const BudgetFlags& f);
void cmd_reproduce(Run& run, const std::string& figure);

extern const std::vector<std::string> kFigures;

// Shared by commands and recipes.
TrplFitOptions trpl_options(const Settings& s);
HomFitOptions hom_options(const Settings& s);
RabiFitOptions rabi_options(const Settings& s);
FitOptions base_options(const Settings& s);
json g2_report(const G2Estimate& e, G2Method method);

}  // namespace photonstat::cli
