#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace eitnsim {

enum class Manifold { Ground5S12, Excited5P32 };

enum class SchemeMode { ScalarN4, FullZeeman24 };

std::string to_string(SchemeMode mode);
SchemeMode scheme_mode_from_string(const std::string& name);

struct AtomicState {
  Manifold manifold = Manifold::Ground5S12;
  int F = 0;
  int mF = 0;
  int index = 0;

  bool is_ground() const { return manifold == Manifold::Ground5S12; }
};

/// Hyperfine splittings in MHz. Only excited_1_2 is a measured input of the
/// experiment; the others are reference data for the 87Rb D2 line.
struct HyperfineIntervals {
  double ground_1_2 = 6834.682611;
  double excited_0_1 = 72.2180;
  double excited_1_2 = 156.9;
  double excited_2_3 = 266.6500;
};

/// Lande g_F factors (reference data, not fitted).
struct LandeFactors {
  double ground_F1 = -0.5;
  double ground_F2 = 0.5;
  double excited_F1 = 2.0 / 3.0;
  double excited_F2 = 2.0 / 3.0;
  double excited_F3 = 2.0 / 3.0;
};

struct LevelSchemeConfig {
  SchemeMode mode = SchemeMode::ScalarN4;
  double gamma_MHz = 6.0;
  HyperfineIntervals intervals;
  LandeFactors g_factors;
  // ScalarN4 only: branching of excited F'=1 (F'=2) into ground {F=1, F=2}.
  std::array<double, 2> branching_e1 = {0.5, 0.5};
  std::array<double, 2> branching_e2 = {0.5, 0.5};
};

/// Immutable basis + energies for either the 4-level scalar model or the
/// full 24-sublevel D2 line.
class LevelScheme {
public:
  SchemeMode mode() const { return config_.mode; }
  const LevelSchemeConfig& config() const { return config_; }
  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<AtomicState>& states() const { return states_; }
  const AtomicState& state(int i) const { return states_[i]; }

  /// Frequency offset (MHz) of state i relative to its manifold reference
  /// (ground F=1, excited F'=1).
  double energy(int i) const { return energies_[i]; }
  /// Hyperfine energy of the (manifold, F) level, same reference as energy().
  double level_energy(Manifold m, int F) const;
  double gamma() const { return config_.gamma_MHz; }
  double g_factor(Manifold m, int F) const;

  bool has_level(Manifold m, int F) const;
  /// Indices of all sublevels of (manifold, F), ascending mF.
  std::vector<int> indices(Manifold m, int F) const;
  std::vector<int> ground_indices() const;
  std::vector<int> excited_indices() const;
  /// F values present for a manifold, ascending.
  std::vector<int> levels(Manifold m) const;
  int index_of(Manifold m, int F, int mF) const;

private:
  friend LevelScheme build_level_scheme(const LevelSchemeConfig& config);
  LevelSchemeConfig config_;
  std::vector<AtomicState> states_;
  std::vector<double> energies_;
};

LevelScheme build_level_scheme(const LevelSchemeConfig& config);

struct DipoleCoupling {
  int ground = 0;
  int excited = 0;
  int q = 0; // mF' - mF
  double amplitude = 0.0;
};

/// Dipole matrix elements <e|d_q|g> normalised so that every excited
/// sublevel has unit total decay strength; the stretched cycling transition
/// has amplitude 1. ScalarN4 uses unit amplitudes with q = 0.
std::vector<DipoleCoupling> dipole_couplings(const LevelScheme& scheme);

/// Linear Zeeman shift in MHz. Throws UnsupportedModeError for ScalarN4.
double zeeman_shift(const AtomicState& state, double field_gauss,
                    const LevelScheme& scheme);

/// Lowering operator L with sum_k L_k^dag L_k = Gamma * P_excited (Gamma in
/// MHz). FullZeeman24 has one operator per (q, ground F): photons emitted
/// into different ground hyperfine levels are distinguishable, so they never
/// build ground hyperfine coherence. ScalarN4 has one per (excited, ground).
struct DecayChannel {
  int q = 0;
  int ground_F = 0;
  int excited_F = -1; // only set for ScalarN4 channels
  Eigen::MatrixXd op;
};

std::vector<DecayChannel> decay_channels(const LevelScheme& scheme);

} // namespace eitnsim
