#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "photonstat/emitter.hpp"
#include "photonstat/histogram.hpp"
#include "photonstat/interferometry.hpp"

namespace photonstat {

struct ParameterEstimate {
  double value = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();
};

struct FitResult {
  std::string model;
  std::string statistic;  ///< "poisson" (deviance) or "chi2" / "sse"
  /// Free parameters in optimisation order.
  std::vector<std::string> free_parameters;
  /// Free and derived quantities by name.
  std::map<std::string, ParameterEstimate> parameters;
  double objective = 0.0;
  std::size_t n_points = 0;
  int evaluations = 0;
  int starts = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  bool low_confidence = false;

  double value(const std::string& name) const;
  double error(const std::string& name) const;
};

enum class FitStatistic { poisson, chi_square };

struct FitOptions {
  int starts = 16;
  std::uint64_t seed = 1;
  FitStatistic statistic = FitStatistic::poisson;
};

struct TrplFitOptions : FitOptions {
  bool equal_lifetimes = true;
  bool fit_background = true;
};

/// Fits I(t)⊗IRF to a time-resolved histogram (pulse at t = 0). Free: t1 (or
/// t1_a, t1_b), delta, amplitude (total signal counts), background per bin.
FitResult fit_trpl(const Histogram& data, const IrfModel& irf, const EmitterParams& start,
                   const TrplFitOptions& options = {});

struct FringePoint {
  double tau = 0.0;  ///< arm delay, ns
  double contrast = 0.0;
};

/// Least squares in T2* with T1 and Δ fixed from `params`. Reports t2_star
/// and the derived coherence time t2.
FitResult fit_fringe(std::span<const FringePoint> data, const EmitterParams& params,
                     const FitOptions& options = {});

struct HomFitOptions : FitOptions {
  bool shared_amplitude = true;
  bool fit_background = true;
};

/// Joint Poisson fit of co- and cross-polarised HOM histograms in T2*, with
/// T1 and Δ fixed. Also reports the model visibility over [-1, 1] ns.
FitResult fit_hom(const Histogram& h_par, const Histogram& h_perp, const IrfModel& irf,
                  const EmitterParams& params, const HomFitOptions& options = {});

enum class G2Method { area_ratio, model_fit };

struct G2Estimate {
  double value = 0.0;
  double std_error = 0.0;
  double tau_qd = std::numeric_limits<double>::quiet_NaN();
  std::optional<FitResult> fit;
};

/// g2(0) from a pulsed HBT coincidence histogram. area_ratio compares the
/// central-peak area with the mean side-peak area using half-period windows
/// (peaks whose window is not fully inside the histogram are ignored).
G2Estimate extract_g2_zero(const Histogram& h, const PulseTrainSpec& train, G2Method method,
                           const IrfModel& irf = IrfModel::delta(), const FitOptions& options = {});

struct RabiPoint {
  double sqrt_power = 0.0;  ///< √P, √nW
  double intensity = 0.0;
};

struct RabiFitOptions : FitOptions {
  bool damping = true;
};

/// Fits A·sin²(k√P)·e^{-β√P} + B. Reports p_pi = (π/(2k))², the π-pulse power.
/// low_confidence is set when the data do not reach the first maximum.
FitResult fit_rabi(std::span<const RabiPoint> data, const RabiFitOptions& options = {});

struct EfficiencyBudget {
  double detected_rate = 17000.0;      ///< counts/s
  double setup_efficiency = 1.81e-3;
  double collection_efficiency = 0.12;
  double rep_rate = 78e6;              ///< Hz

  void validate() const;
};

/// Internal quantum efficiency rate / (η_setup·η_collection·f_rep).
/// Values above 1 are returned unclamped.
double internal_quantum_efficiency(const EfficiencyBudget& budget);

}  // namespace photonstat
