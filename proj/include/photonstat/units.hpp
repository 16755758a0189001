#pragma once

#include <numbers>

namespace photonstat::units {

// Library-wide conventions: time in ns, energy in µeV, wavelength in nm.

/// Reduced Planck constant in µeV·ns.
inline constexpr double kHbar = 0.6582119569;
/// hc in eV·nm, used for wavelength <-> photon energy.
inline constexpr double kHc = 1239.842;

inline constexpr double kPi = std::numbers::pi;

// SI helpers for the pulse-area calculation.
inline constexpr double kHbarSI = 1.054571817e-34;  // J·s
inline constexpr double kDebye = 3.33564e-30;       // C·m

/// Energy splitting (µeV) to angular frequency (rad/ns).
constexpr double to_angular(double energy_ueV) { return energy_ueV / kHbar; }

/// Beat period 2πħ/Δ in ns for an energy splitting in µeV.
constexpr double beat_period(double energy_ueV) { return 2.0 * kPi * kHbar / energy_ueV; }

constexpr double wavelength_to_energy_eV(double lambda_nm) { return kHc / lambda_nm; }
constexpr double energy_eV_to_wavelength(double energy_eV) { return kHc / energy_eV; }
constexpr double wavelength_to_energy_ueV(double lambda_nm) { return 1e6 * kHc / lambda_nm; }
constexpr double energy_ueV_to_wavelength(double energy_ueV) { return 1e6 * kHc / energy_ueV; }

}  // namespace photonstat::units
