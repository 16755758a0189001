#include "photonstat/emitter.hpp"

#include <algorithm>
#include <cmath>

#include "photonstat/error.hpp"
#include "photonstat/quadrature.hpp"
#include "photonstat/units.hpp"

namespace photonstat {

using units::kPi;

void EmitterParams::validate() const {
  require(std::isfinite(delta) && delta >= 0.0, "emitter: delta must be >= 0");
  require(std::isfinite(t1_a) && t1_a > 0.0, "emitter: t1_a must be > 0");
  require(std::isfinite(t1_b) && t1_b > 0.0, "emitter: t1_b must be > 0");
  require(t2_star > 0.0, "emitter: t2_star must be > 0");
  require(phi0 >= 0.0 && phi0 <= 0.5 * kPi, "emitter: phi0 must lie in [0, pi/2]");
  if (omega_center) require(*omega_center > 0.0, "emitter: omega_center must be > 0");
}

double EmitterParams::beat_frequency() const { return units::to_angular(delta); }

double EmitterParams::integration_horizon() const { return 20.0 * std::max(t1_a, t1_b); }

EmitterParams EmitterParams::equal_lifetime(double t1, double delta_ueV, double t2_star) {
  EmitterParams p;
  p.delta = delta_ueV;
  p.t1_a = t1;
  p.t1_b = t1;
  p.t2_star = t2_star;
  return p;
}

void ExcitationPulse::validate() const {
  require(rep_rate > 0.0, "pulse: rep_rate must be > 0");
  require(pulse_fwhm > 0.0, "pulse: pulse_fwhm must be > 0");
  require(spot_area > 0.0, "pulse: spot_area must be > 0");
  require(transmittance > 0.0 && transmittance <= 1.0, "pulse: transmittance must be in (0, 1]");
  require(impedance > 0.0, "pulse: impedance must be > 0");
  require(dipole > 0.0, "pulse: dipole must be > 0");
  require(std::isfinite(power) && power >= 0.0, "pulse: power must be >= 0");
}

double pulse_area_constant(const ExcitationPulse& pulse) {
  pulse.validate();
  const double rep_hz = pulse.rep_rate * 1e6;
  const double width_s = pulse.pulse_fwhm * 1e-12;
  const double area_m2 = pulse.spot_area * 1e-12;
  const double shape = 2.0 * std::sqrt(kPi) / std::log(2.0);
  // sqrt(T·η/(F·A) · 2√π/ln2 · Δt) is in V·s/(m·√W); dividing p₀·E·t by ħ
  // makes the area dimensionless.
  const double c = std::sqrt(pulse.transmittance * pulse.impedance / (rep_hz * area_m2) * shape *
                             width_s);
  return c / units::kHbarSI;
}

double pulse_area(const ExcitationPulse& pulse) {
  return pulse_area_constant(pulse) * pulse.dipole * units::kDebye * std::sqrt(pulse.power * 1e-9);
}

double pulse_label(const ExcitationPulse& pulse) { return 2.0 * pulse_area(pulse); }

double power_for_pulse_label(ExcitationPulse pulse, double label) {
  require(label >= 0.0, "pulse: label must be >= 0");
  const double k = pulse_area_constant(pulse) * pulse.dipole * units::kDebye;
  const double sqrt_watts = 0.5 * label / k;
  return sqrt_watts * sqrt_watts * 1e9;
}

double rabi_population(double theta) {
  const double s = std::sin(theta);
  return s * s;
}

double rabi_population(const ExcitationPulse& pulse) { return rabi_population(pulse_area(pulse)); }

double damped_rabi_population(double theta, double sqrt_power, double beta) {
  return rabi_population(theta) * std::exp(-beta * sqrt_power);
}

std::pair<std::complex<double>, std::complex<double>> initial_state(double theta,
                                                                    const EmitterParams& params) {
  params.validate();
  const double s = std::sin(theta);
  return {s * std::cos(params.phi0), s * std::sin(params.phi0)};
}

std::pair<std::complex<double>, std::complex<double>> initial_state(const ExcitationPulse& pulse,
                                                                    const EmitterParams& params) {
  return initial_state(pulse_area(pulse), params);
}

namespace {

// e^{-t/2T1b}·(e^{x} - 1) with x = -(1/2T1a - 1/2T1b)t - iΔωt, written with
// expm1 so the equal-lifetime case keeps full relative precision near t = 0.
std::complex<double> envelope_unchecked(double t, const EmitterParams& p) {
  const double a = -(0.5 / p.t1_a - 0.5 / p.t1_b) * t;
  const double b = -p.beat_frequency() * t;
  const double half = std::sin(0.5 * b);
  const double re = std::expm1(a) * std::cos(b) - 2.0 * half * half;
  const double im = std::exp(a) * std::sin(b);
  return std::exp(-0.5 * t / p.t1_b) * std::complex<double>(re, im);
}

}  // namespace

std::complex<double> wavepacket_envelope(double t, const EmitterParams& params) {
  require(t >= 0.0, "wavepacket_envelope: t must be >= 0");
  return envelope_unchecked(t, params);
}

double time_resolved_intensity(double t, const EmitterParams& params) {
  require(t >= 0.0, "time_resolved_intensity: t must be >= 0");
  return std::norm(envelope_unchecked(t, params));
}

double cumulative_intensity(double t, const EmitterParams& p) {
  require(t >= 0.0, "cumulative_intensity: t must be >= 0");
  const double w = p.beat_frequency();
  const double r = 0.5 / p.t1_a + 0.5 / p.t1_b;
  const double direct = -p.t1_a * std::expm1(-t / p.t1_a) - p.t1_b * std::expm1(-t / p.t1_b);
  // Re ∫₀ᵗ e^{-(r - iω)s} ds = Re[(1 - e^{-(r - iω)t}) / (r - iω)]
  const std::complex<double> z(r, -w);
  const std::complex<double> cross = (1.0 - std::exp(-z * t)) / z;
  return std::max(0.0, direct - 2.0 * cross.real());
}

double wavepacket_norm(const EmitterParams& params) {
  params.validate();
  if (!params.equal_lifetimes()) return wavepacket_norm_quadrature(params);
  const double w = params.beat_frequency();
  const double t1 = params.t1_a;
  const double x = w * w * t1 * t1;
  return 2.0 * x * t1 / (1.0 + x);
}

double wavepacket_norm_quadrature(const EmitterParams& params) {
  params.validate();
  return integrate([&](double t) { return std::norm(envelope_unchecked(t, params)); }, 0.0,
                   params.integration_horizon());
}

}  // namespace photonstat
