#pragma once

#include <span>

#include "photonstat/emitter.hpp"

namespace photonstat {

/// Phonon dephasing γ(T) = γ0·n(n+1) with Bose occupation n = 1/(e^{α/T}-1),
/// plus spectral diffusion and Purcell enhancement of the radiative rate.
struct ThermalModel {
  double gamma0 = 0.0;    ///< ns⁻¹
  double alpha = 45.0;    ///< activation temperature, K
  double gamma_sd = 0.0;  ///< spectral-diffusion dephasing rate, ns⁻¹
  double purcell = 1.0;   ///< F_p >= 1

  void validate() const;
};

double bose_occupation(double temperature, double alpha);
double phonon_rate(double temperature, const ThermalModel& model);

/// V(T) = Γ·Fp / (Γ_SD + γ(T) + Γ·Fp), Γ = 1/(2 T1) with T1 = t1_a.
double tpi_visibility(double temperature, const EmitterParams& params, const ThermalModel& model);

struct TemperaturePoint {
  double temperature = 0.0;  ///< K
  double visibility = 0.0;
};

struct FreeThermalParameters {
  bool gamma0 = false;
  bool alpha = false;
  bool gamma_sd = false;

  int count() const { return int(gamma0) + int(alpha) + int(gamma_sd); }
};

struct ThermalCalibration {
  ThermalModel model;
  /// A fitted rate came out negative and was clamped to zero.
  bool clamped = false;
  /// max |V_model - V_measured| over the input points.
  double max_residual = 0.0;
};

/// Least-squares calibration of the free parameters of tpi_visibility;
/// fixed parameters are taken from `start`. Exact interpolation when the
/// number of points equals the number of free parameters.
ThermalCalibration calibrate_thermal(std::span<const TemperaturePoint> points,
                                     const EmitterParams& params, const ThermalModel& start,
                                     FreeThermalParameters free);

enum class MultiphotonCorrection {
  divide,    ///< V / (1 - 2 g2(0))   (default)
  multiply,  ///< V · (1 + 2 g2(0))
};

double correct_visibility_multiphoton(double v_raw, double g2_zero,
                                      MultiphotonCorrection convention = MultiphotonCorrection::divide);

/// Single-photon purity 1 - g2(0)/2.
double purity_from_g2(double g2_zero);

}  // namespace photonstat
