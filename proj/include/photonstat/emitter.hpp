#pragma once

#include <complex>
#include <optional>
#include <utility>

namespace photonstat {

/// Three-level emitter: ground state plus two fine-structure-split exciton
/// levels |1_a>, |1_b> separated by `delta`.
struct EmitterParams {
  double delta = 0.0;    ///< splitting Δ, µeV
  double t1_a = 1.0;     ///< radiative lifetime of |1_a>, ns
  double t1_b = 1.0;     ///< radiative lifetime of |1_b>, ns
  double t2_star = 1.0;  ///< pure dephasing time, ns
  double phi0 = 0.7853981633974483;  ///< dipole angle, rad
  std::optional<double> omega_center;  ///< center emission energy, µeV (bookkeeping)

  /// Throws InvalidInput when an invariant is violated.
  void validate() const;

  bool equal_lifetimes() const { return t1_a == t1_b; }
  /// Δω in rad/ns.
  double beat_frequency() const;
  /// Upper limit used for integrals over the single-photon wavepacket.
  double integration_horizon() const;

  static EmitterParams equal_lifetime(double t1, double delta_ueV, double t2_star = 1.0);
};

/// Resonant pulsed excitation. Units follow the lab convention of the
/// instrument: MHz, ps, µm², ohm, debye, nW.
struct ExcitationPulse {
  double rep_rate = 78.0;
  double pulse_fwhm = 3.0;
  double spot_area = 1.22;
  double transmittance = 0.66;
  double impedance = 110.0;
  double dipole = 70.0;
  double power = 0.0;

  void validate() const;
};

/// Instrument constant C (units of √W⁻¹ after division by ħ) such that
/// θ = C·p₀·√P.
double pulse_area_constant(const ExcitationPulse& pulse);

/// Pulse area θ = C·p₀·√P_inc. Population after the pulse is sin²θ.
double pulse_area(const ExcitationPulse& pulse);

/// User-facing label 2θ: "π pulse" means full inversion.
double pulse_label(const ExcitationPulse& pulse);

/// Incident power that produces the given label (2θ) for this instrument.
double power_for_pulse_label(ExcitationPulse pulse, double label);

double rabi_population(double theta);
double rabi_population(const ExcitationPulse& pulse);

/// Phenomenological excitation-induced damping e^{-β√P} applied to the
/// Rabi population. Not part of the coherent model; fitters use it to
/// absorb the decay of the oscillation amplitude.
double damped_rabi_population(double theta, double sqrt_power, double beta);

/// Exciton amplitudes (c_a, c_b) right after the pulse.
std::pair<std::complex<double>, std::complex<double>> initial_state(double theta,
                                                                    const EmitterParams& params);
std::pair<std::complex<double>, std::complex<double>> initial_state(const ExcitationPulse& pulse,
                                                                    const EmitterParams& params);

/// Deterministic bracket of the emitted wavepacket in the ω_b rotating frame:
/// e^{-iΔωt - t/2T1a} - e^{-t/2T1b}. Throws for t < 0.
std::complex<double> wavepacket_envelope(double t, const EmitterParams& params);

/// |wavepacket_envelope(t)|², the time-resolved detection probability
/// (arbitrary units, peak value up to 4).
double time_resolved_intensity(double t, const EmitterParams& params);

/// ∫₀ᵗ I(s) ds in closed form. Used for inverse-CDF sampling and exact bin
/// integration; wavepacket_norm() is the t → ∞ limit.
double cumulative_intensity(double t, const EmitterParams& params);

/// I₀ = ∫₀^∞ I(t) dt. Closed form 2Δω²T³/(1+Δω²T²) for equal lifetimes,
/// adaptive quadrature otherwise. Note the paper-style normalisation of the
/// fringe formula uses I₀/4 (the integral of e^{-t/T}sin²(Δωt/2)).
double wavepacket_norm(const EmitterParams& params);

/// Same integral by adaptive quadrature regardless of lifetimes.
double wavepacket_norm_quadrature(const EmitterParams& params);

}  // namespace photonstat
