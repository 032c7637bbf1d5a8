#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eitnsim {

enum class ValidationLevel { Quick, Full };

struct ValidationOptions {
  ValidationLevel level = ValidationLevel::Quick;
  std::uint64_t seed = 20000131;
  // Test-only: name of an internal constant to corrupt ("" = none).
  std::string fault;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;     // the measured quantity
  double threshold = 0.0; // pass bound for `value`
  std::string detail;
  double seconds = 0.0;
};

std::vector<CheckResult> run_validation(const ValidationOptions& options);

// Individual oracles. Each returns the quantity compared against its bound.

/// Max |rho_ee - analytic| over a 5 x 5 grid of detuning and Rabi frequency
/// for a closed two-level atom. `gamma_scale` != 1 corrupts the model's decay
/// rate relative to the formula.
double two_level_oracle_error(double gamma_scale = 1.0);

/// |FWHM - 520| / 520 for the 300 K Doppler profile, with the FWHM taken
/// from the second moment of the velocity quadrature.
double doppler_fwhm_deviation();

/// Laser-1 absorption at two-photon resonance of a Lambda system divided by
/// its value 20 MHz away from it (both one-photon resonant).
double dark_state_ratio();

/// Largest trace-norm distance between steady_state and long propagation
/// over `draws` random ScalarN4 configurations.
double steady_vs_propagation(int draws, std::uint64_t seed);

/// Floquet with zero sideband intensity against the secular steady state:
/// max of the generator difference and the trace-norm state difference.
double floquet_secular_ratio0_difference();

struct MonodromySpectrum {
  double max_modulus = 0.0;
  int unit_eigenvalues = 0; // within 1e-10 of modulus 1
};
/// ScalarN4 with sidebands at a few velocity classes (worst case).
MonodromySpectrum monodromy_spectrum();

/// Largest |Tr L rho| and anti-Hermitian part of L rho over random states.
double generator_property_error(bool full_zeeman, std::uint64_t seed);

/// Relative change of FullZeeman24 absorption when B and both polarizations
/// are rotated together.
double covariance_error(std::uint64_t seed);

} // namespace eitnsim
