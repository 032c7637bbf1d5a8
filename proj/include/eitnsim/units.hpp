#pragma once

#include <numbers>

// User-facing quantities are ordinary frequencies in MHz, fields in Gauss,
// velocities in m/s. Generators and time evolution work in rad/us, so the
// only 2*pi in the code base lives in angular().

namespace eitnsim::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Bohr magneton in MHz per Gauss.
inline constexpr double kBohrMagneton = 1.3996;

inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kAtomicMassUnit = 1.66053906660e-27; // kg
inline constexpr double kRb87Mass = 86.909180527 * kAtomicMassUnit;
inline constexpr double kZeroCelsius = 273.15;

/// MHz -> rad/us.
constexpr double angular(double mhz) { return kTwoPi * mhz; }

/// Doppler shift in MHz seen by an atom moving at `velocity` (m/s) along a
/// beam of wavelength `wavelength_nm`.
constexpr double doppler_shift(double velocity, double wavelength_nm) {
  return velocity / (wavelength_nm * 1e-9) * 1e-6;
}

} // namespace eitnsim::units
