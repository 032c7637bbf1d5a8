#include "eitnsim/field.hpp"

#include "eitnsim/error.hpp"

#include <cmath>
#include <numbers>

namespace eitnsim {

std::string to_string(Laser laser) {
  return laser == Laser::Laser1 ? "laser1" : "laser2";
}

std::string LaserField::reference_transition() const {
  return parent == Laser::Laser1 ? "F=2->F'=2" : "F=1->F'=1";
}

LaserField make_field(Laser parent, double carrier_detuning_MHz,
                      double intensity, const Eigen::Vector3cd& polarization,
                      double linewidth_MHz) {
  if (std::abs(polarization.norm() - 1.0) > 1e-9)
    throw ValidationError("polarization must have unit norm (got " +
                          std::to_string(polarization.norm()) + ")");
  if (!(intensity >= 0.0))
    throw ValidationError("laser intensity must be non-negative");
  if (!(linewidth_MHz >= 0.0))
    throw ValidationError("laser linewidth must be non-negative");
  if (!std::isfinite(carrier_detuning_MHz))
    throw ValidationError("laser detuning must be finite");

  LaserField field;
  field.parent = parent;
  field.carrier_detuning_MHz = carrier_detuning_MHz;
  field.intensity = intensity;
  field.polarization = polarization;
  field.linewidth_MHz = linewidth_MHz;
  field.target_ground_F = parent == Laser::Laser1 ? 2 : 1;
  field.components.push_back({parent, 0, 0.0, 1.0, coherence_class_of(parent)});
  return field;
}

LaserField apply_modulation(const LaserField& field, double f_MHz,
                            double intensity_ratio) {
  if (field.modulated() || field.components.size() != 1)
    throw ValidationError("field is already modulated");
  if (!(f_MHz > 0.0) || !std::isfinite(f_MHz))
    throw ValidationError("modulation frequency must be positive");
  if (!(intensity_ratio >= 0.0 && intensity_ratio <= 1.0))
    throw ValidationError("sideband intensity ratio must lie in [0, 1]");

  LaserField out = field;
  out.modulation_MHz = f_MHz;
  const double amplitude = std::sqrt(intensity_ratio);
  const int cls = field.carrier().coherence_class;
  out.components.push_back({field.parent, -1, -f_MHz, amplitude, cls});
  out.components.push_back({field.parent, +1, +f_MHz, amplitude, cls});
  return out;
}

double rabi_from_intensity(double intensity, double saturation_intensity,
                           double gamma_MHz) {
  if (!(saturation_intensity > 0.0))
    throw ConfigError("saturation intensity must be positive");
  if (!(intensity >= 0.0))
    throw ValidationError("intensity must be non-negative");
  return gamma_MHz * std::sqrt(intensity / (2.0 * saturation_intensity));
}

Eigen::Matrix3d quantization_frame(const Eigen::Vector3d& axis) {
  const double norm = axis.norm();
  if (!(norm > 0.0)) throw ValidationError("quantization axis has zero length");
  const Eigen::Vector3d n = axis / norm;
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();

  // Minimal rotation taking z onto n, applied to x and y.
  Eigen::Matrix3d rot;
  const double c = z.dot(n);
  if (c < -1.0 + 1e-12) {
    rot = Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitX())
              .toRotationMatrix();
  } else {
    rot = Eigen::Quaterniond::FromTwoVectors(z, n).toRotationMatrix();
  }
  Eigen::Matrix3d frame;
  frame.col(0) = rot * Eigen::Vector3d::UnitX();
  frame.col(1) = rot * Eigen::Vector3d::UnitY();
  frame.col(2) = n;
  return frame;
}

std::array<std::complex<double>, 3>
polarization_components(const Eigen::Vector3cd& polarization,
                        const Eigen::Vector3d& quantization_axis) {
  if (std::abs(polarization.norm() - 1.0) > 1e-9)
    throw ValidationError("polarization must have unit norm");
  const Eigen::Matrix3d frame = quantization_frame(quantization_axis);
  const Eigen::Vector3cd local = frame.transpose().cast<std::complex<double>>() *
                                 polarization;
  const std::complex<double> i(0.0, 1.0);
  const double r = 1.0 / std::sqrt(2.0);
  // e_{+1} = -(x + i y)/sqrt2, e_0 = z, e_{-1} = (x - i y)/sqrt2.
  return {r * (local.x() + i * local.y()), local.z(),
          -r * (local.x() - i * local.y())};
}

} // namespace eitnsim
