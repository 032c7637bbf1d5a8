#pragma once

#include "eitnsim/atom.hpp"
#include "eitnsim/liouvillian.hpp"
#include "eitnsim/units.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace eitnsim {

struct DopplerConfig {
  double temperature_C = 30.0;
  double atomic_mass_kg = units::kRb87Mass;
  double wavelength_nm = 780.0;
  int n_velocity = 4096;
};

/// Quadrature for the 1-D Maxwell-Boltzmann velocity projection.
struct VelocityGrid {
  std::vector<double> nodes;   // m/s
  std::vector<double> weights; // sum to 1
  double sigma = 0.0;          // m/s, standard deviation of the projection
};

/// Gauss-Hermite rule of order n_velocity. Nodes whose weight is below
/// 1e-16 of the largest are dropped and the rest renormalised.
VelocityGrid velocity_grid(const DopplerConfig& doppler);

/// RMS velocity projection sqrt(kB T / m), m/s.
double doppler_sigma(const DopplerConfig& doppler);
/// FWHM (MHz) of the Doppler profile of a single optical resonance.
double doppler_fwhm(const DopplerConfig& doppler);

enum class ScanAxis { Laser2Detuning, GeneratorFrequency, MagneticField };
/// Laser2Detuning only: axis values are offsets from this origin.
enum class AxisOrigin { Zero, Raman };

std::string to_string(ScanAxis axis);
ScanAxis scan_axis_from_string(const std::string& name);
std::string to_string(AxisOrigin origin);
AxisOrigin axis_origin_from_string(const std::string& name);

/// Inclusive uniform grid start, start + step, ... <= stop.
struct Segment {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
};

struct ModulationConfig {
  Laser laser = Laser::Laser1;
  double frequency_MHz = 156.9;
  double ratio = 0.0; // sideband / carrier intensity
};

struct ScanConfig {
  std::string name = "custom";
  ScanAxis axis = ScanAxis::Laser2Detuning;
  AxisOrigin origin = AxisOrigin::Raman;
  std::vector<Segment> segments;
  FieldSet fields; // unmodulated carriers
  ModulationConfig modulation;
  Eigen::Vector3d B_gauss = Eigen::Vector3d::Zero();
  RelaxationConfig relaxation;
  FrameMode solver_mode = FrameMode::Secular;
  // Axis intervals (same origin as the segments) solved in Floquet mode
  // when solver_mode is Secular.
  std::vector<std::pair<double, double>> floquet_windows;
  double optical_depth_scale = 0.0; // <= 0: calibrate from the baseline
  double baseline_fraction = 0.10;  // laser-1 absorbed fraction, laser 2 off
};

/// Axis values in scan order, origin not applied. Throws ConfigError for an
/// empty grid or a non-positive step.
std::vector<double> grid_values(const ScanConfig& config);

/// Laser-2 detuning (from F=1 -> F'=1) of the two-photon Raman resonance
/// with the laser-1 carrier.
double raman_detuning(const LevelScheme& scheme, const FieldSet& fields);

/// Offset (MHz) of the line-strength weighted centre of the transition group
/// addressed by `laser`, relative to that laser's reference transition.
double group_center(const LevelScheme& scheme, Laser laser);

struct PointInfo {
  FrameMode mode = FrameMode::Secular;
  double max_residual = 0.0; // steady-state residual or periodicity residual
  int warnings = 0;
};

struct SpectrumResult {
  std::string name;
  ScanAxis axis = ScanAxis::Laser2Detuning;
  std::vector<double> axis_values;     // MHz (G for MagneticField)
  std::vector<double> absorption_laser1; // absorbed fraction
  std::vector<double> absorption_laser2;
  std::vector<double> alpha_laser1;    // Doppler-averaged coefficient
  std::vector<double> alpha_laser2;
  std::vector<PointInfo> points;
  double optical_depth_scale = 0.0;
  double origin_MHz = 0.0;             // Raman point (Laser2Detuning)
  double gamma_MHz = 0.0;
  std::string config_hash;
  std::vector<std::string> warnings;

  std::size_t size() const { return axis_values.size(); }
};

struct ScanOptions {
  int threads = 0;        // 0: OpenMP default
  bool parallel = true;
};

/// Doppler-averaged absorption over the grid. Solver failures abort with a
/// SolverError naming the grid point and velocity node.
SpectrumResult scan(const ScanConfig& config, const LevelScheme& scheme,
                    const DopplerConfig& doppler,
                    const ScanOptions& options = {});

/// Single-threaded reference path of scan(); results are bit-identical.
SpectrumResult scan_serial(const ScanConfig& config, const LevelScheme& scheme,
                           const DopplerConfig& doppler);

/// Doppler-averaged absorption coefficients for one axis value.
std::pair<double, double> doppler_average(const ScanConfig& config,
                                          const LevelScheme& scheme,
                                          const VelocityGrid& grid,
                                          double axis_value);

enum class FeatureKind { Peak, Dip };

std::string to_string(FeatureKind kind);

struct Feature {
  FeatureKind kind = FeatureKind::Dip;
  double position = 0.0;
  double fwhm = 0.0;     // NaN when unresolved
  double contrast = 0.0; // dips: (envelope - min) / envelope; peaks: prominence / height
  bool resolved = true;
};

struct DipOptions {
  double window_linewidths = 5.0;
  double min_dip_contrast = 2e-3;
  double min_peak_prominence = 0.05; // relative to the segment's range
  // Dips wider than this fraction of the smoothing window are curvature of
  // the background that the envelope cannot follow, not resonances.
  double max_dip_width_fraction = 0.6;
};

/// Peaks and dips of laser-1 absorption. Each contiguous grid segment is
/// analysed separately.
std::vector<Feature> dip_metrics(const SpectrumResult& result,
                                 const DipOptions& options = {});

/// Same on raw samples; `linewidth` sets the smoothing window.
std::vector<Feature> dip_metrics(const std::vector<double>& x,
                                 const std::vector<double>& y,
                                 double linewidth,
                                 const DipOptions& options = {});

/// Upper envelope used by dip_metrics: quadratic Savitzky-Golay smoothing
/// with iterative clipping of points below the current envelope.
std::vector<double> upper_envelope(const std::vector<double>& y, int window);

} // namespace eitnsim
