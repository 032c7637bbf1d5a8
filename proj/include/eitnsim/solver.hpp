#pragma once

#include "eitnsim/liouvillian.hpp"

#include <Eigen/Dense>

#include <map>
#include <utility>
#include <vector>

namespace eitnsim {

struct DensityMatrix {
  Eigen::MatrixXcd rho;
  double velocity = 0.0;
  double scan_point = 0.0;
  double residual = 0.0;              // ||L rho|| / ||L|| after the solve
  double symmetrization_error = 0.0;  // ||rho - rho^dag|| before symmetrizing

  int size() const { return static_cast<int>(rho.rows()); }
  /// Throws SolverError unless Hermitian, unit trace and positive within
  /// numerical tolerance.
  void check_invariants() const;
  double min_eigenvalue() const;
};

/// Sum of singular values of a Hermitian matrix.
double trace_norm(const Eigen::MatrixXcd& a);

/// Unique null vector of a time-independent generator with unit trace.
DensityMatrix steady_state(const Superoperator& L);

struct PropagateOptions {
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  double min_step_us = 1e-14;
  // Dense period maps: target error of the one-period product before the
  // final Richardson step.
  double magnus_tolerance = 1e-7;
};

/// Adaptive Dormand-Prince integration of d rho/dt = L(t) rho from t = 0.
DensityMatrix propagate(const Superoperator& L, const Eigen::MatrixXcd& rho0,
                        double t_final_us, const PropagateOptions& options = {});

/// One-period propagator of a time-periodic generator, as an n^2 x n^2 map.
Eigen::MatrixXcd monodromy(const Superoperator& L, double f_MHz,
                           const PropagateOptions& options = {});

struct PeriodicSteadyState {
  DensityMatrix rho;                        // at phase 0
  std::vector<Eigen::MatrixXcd> trajectory; // samples over one period
  std::vector<double> times_us;
  Eigen::VectorXcd eigenvalues;             // of the monodromy map
  double periodicity_residual = 0.0;        // ||Phi(rho) - rho||_1
  double period_us = 0.0;
};

/// Fixed point of the monodromy map. `f_MHz` <= 0 uses L.frequency_MHz.
/// Small generators use a fourth-order Magnus product with step doubling and
/// Richardson extrapolation; large ones integrate with Dormand-Prince.
PeriodicSteadyState period_map_steady_state(const Superoperator& L,
                                            double f_MHz = 0.0,
                                            int samples = 32,
                                            const PropagateOptions& options = {
                                                1e-11, 1e-13, 1e-16, 1e-7});

struct ComponentAbsorption {
  Laser laser = Laser::Laser1;
  int component = 0;
  double value = 0.0;
};

struct AbsorptionSample {
  double laser1 = 0.0;
  double laser2 = 0.0;
  std::vector<ComponentAbsorption> components;
  bool time_averaged = false;

  double get(Laser laser) const {
    return laser == Laser::Laser1 ? laser1 : laser2;
  }
};

/// Absorbed photon rate per laser, scaled by Gamma / sum_c Omega_c^2 so a
/// weakly driven resonant closed two-level atom gives 1. Negative = gain.
AbsorptionSample absorption(const DensityMatrix& rho, const Hamiltonian& H);
AbsorptionSample absorption(const PeriodicSteadyState& state,
                            const Hamiltonian& H);

} // namespace eitnsim
