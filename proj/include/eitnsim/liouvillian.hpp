#pragma once

#include "eitnsim/atom.hpp"
#include "eitnsim/field.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <map>
#include <string>
#include <vector>

namespace eitnsim {

using Complex = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<Complex>;

enum class FrameMode { Secular, Floquet };

std::string to_string(FrameMode mode);
FrameMode frame_mode_from_string(const std::string& name);

/// Both lasers plus the constants needed to turn them into couplings.
struct FieldSet {
  LaserField laser1 = make_field(Laser::Laser1, 0.0, 0.0, {1, 0, 0}, 0.0);
  LaserField laser2 = make_field(Laser::Laser2, 0.0, 0.0, {0, 1, 0}, 0.0);
  double saturation_intensity = 1.67; // mW/cm^2
  double wavelength_nm = 780.0;

  const LaserField& get(Laser laser) const {
    return laser == Laser::Laser1 ? laser1 : laser2;
  }
  /// Common modulation frequency of the modulated lasers (0 if none).
  double modulation_MHz() const;
};

/// A field component driving every sublevel pair of one hyperfine
/// transition (ground F -> excited F').
struct DrivenTransition {
  Laser laser = Laser::Laser1;
  int component = 0; // index into LaserField::components
  int order = 0;
  int ground_F = 0;
  int excited_F = 0;
  double detuning_MHz = 0.0; // Doppler-shifted, atom frame
  bool kept = true;          // false: dropped to keep the frame static
};

struct FrameAssignment {
  FrameMode mode = FrameMode::Secular;
  double velocity = 0.0;
  double residual_frequency_MHz = 0.0;
  std::vector<DrivenTransition> transitions;
  // Frame offset of each hyperfine level in units of the modulation
  // frequency, indexed by manifold_slot().
  std::array<int, 6> shift{};
  std::vector<std::string> warnings;

  int frame_shift(Manifold m, int F) const;
  /// (ground, excited) state pairs driven by a component.
  std::vector<std::pair<int, int>> pairs(const LevelScheme& scheme, Laser laser,
                                         int component) const;
};

int manifold_slot(Manifold m, int F);

struct RelaxationConfig {
  double gamma_t_MHz = 0.01; // transit relaxation
  double gamma_L_MHz = 1.0;  // mutual dephasing of the two lasers
  bool optical_dephasing = false;
};

struct CouplingTerm {
  Laser laser = Laser::Laser1;
  int component = 0;
  int harmonic = 0; // value multiplies exp(i * harmonic * w t)
  int excited = 0;
  int ground = 0;
  Complex value; // H[excited, ground], rad/us
};

/// Rotating-frame Hamiltonian, rad/us. H(t) = H0 + sum_m H_m exp(i m w t).
struct Hamiltonian {
  int n = 0;
  Eigen::MatrixXcd static_part;
  std::map<int, Eigen::MatrixXcd> harmonics;
  double frequency_MHz = 0.0;
  FrameMode mode = FrameMode::Secular;
  double velocity = 0.0;
  double gamma = 0.0; // rad/us
  std::array<double, 2> rabi_weight{}; // sum_c Omega_c^2 per laser, (rad/us)^2
  std::vector<CouplingTerm> couplings;
};

/// Linear generator on row-major vec(rho), rad/us.
struct Superoperator {
  int n = 0;
  SparseMatrixC static_part;
  std::vector<std::pair<int, SparseMatrixC>> harmonics;
  double frequency_MHz = 0.0;
  double velocity = 0.0; // m/s, carried into solved states

  int dimension() const { return n * n; }
  bool time_dependent() const { return !harmonics.empty(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v, double t_us = 0.0) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& u, double t_us) const;
};

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, int n);

/// -i[H, .]
SparseMatrixC commutator_superop(const Eigen::MatrixXcd& H);
/// L . L^dag - {L^dag L, .}/2
SparseMatrixC lindblad_superop(const Eigen::MatrixXcd& L);
/// Uniform decay at `rate` plus repopulation of `ground` as a flat mixture.
SparseMatrixC transit_superop(int n, const std::vector<int>& ground,
                              double rate);

FrameAssignment assign_frames(const LevelScheme& scheme, const FieldSet& fields,
                              double velocity, FrameMode mode);

Hamiltonian assemble_hamiltonian(const LevelScheme& scheme,
                                 const FieldSet& fields,
                                 const Eigen::Vector3d& B_gauss,
                                 const FrameAssignment& frame);

SparseMatrixC assemble_dissipator(const LevelScheme& scheme,
                                  const RelaxationConfig& relax,
                                  const FrameAssignment& frame);

Superoperator liouvillian(const Hamiltonian& H, const SparseMatrixC& D);

/// Everything the solver needs for one velocity class.
struct Generator {
  FrameAssignment frame;
  Hamiltonian hamiltonian;
  Superoperator L;
};

Generator build_generator(const LevelScheme& scheme, const FieldSet& fields,
                          const Eigen::Vector3d& B_gauss,
                          const RelaxationConfig& relax, double velocity,
                          FrameMode mode);

} // namespace eitnsim
