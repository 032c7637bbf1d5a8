#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace eitnsim {

enum class Laser { Laser1, Laser2 };

std::string to_string(Laser laser);

/// One phase-coherent spectral line of a laser (carrier or sideband).
struct FieldComponent {
  Laser parent = Laser::Laser1;
  int order = 0;             // 0 carrier, +-1 first sidebands
  double offset_MHz = 0.0;   // order * modulation frequency
  double amplitude_rel = 1.0;
  int coherence_class = 0;
};

struct LaserField {
  Laser parent = Laser::Laser1;
  // Laser1: relative to the F=2 -> F'=2 line centre; Laser2: relative to
  // F=1 -> F'=1. Atoms at rest.
  double carrier_detuning_MHz = 0.0;
  double intensity = 0.0;                // mW/cm^2
  Eigen::Vector3cd polarization{1, 0, 0}; // lab frame, unit norm
  double linewidth_MHz = 0.0;
  std::vector<FieldComponent> components;
  int target_ground_F = 2;
  double modulation_MHz = 0.0; // 0 = unmodulated

  bool modulated() const { return modulation_MHz > 0.0; }
  const FieldComponent& carrier() const { return components.front(); }
  /// Reference transition for the carrier detuning, e.g. "F=2->F'=2".
  std::string reference_transition() const;
};

inline int coherence_class_of(Laser laser) {
  return laser == Laser::Laser1 ? 1 : 2;
}

LaserField make_field(Laser parent, double carrier_detuning_MHz,
                      double intensity, const Eigen::Vector3cd& polarization,
                      double linewidth_MHz);

/// Adds +-f sidebands with intensity ratio `intensity_ratio` to the carrier.
LaserField apply_modulation(const LaserField& field, double f_MHz,
                            double intensity_ratio);

/// Peak Rabi frequency (MHz) of the stretched transition.
double rabi_from_intensity(double intensity, double saturation_intensity,
                           double gamma_MHz);

/// Spherical components c_q (index q + 1) of `polarization` about
/// `quantization_axis`: polarization = sum_q c_q e_q.
std::array<std::complex<double>, 3>
polarization_components(const Eigen::Vector3cd& polarization,
                        const Eigen::Vector3d& quantization_axis);

/// Orthonormal frame (u, w, n) with n along `axis`, continuous away from -z.
Eigen::Matrix3d quantization_frame(const Eigen::Vector3d& axis);

} // namespace eitnsim
