#include "eitnsim/spectrum.hpp"

#include "eitnsim/error.hpp"
#include "eitnsim/solver.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

namespace eitnsim {

// ---------------------------------------------------------------- velocities

double doppler_sigma(const DopplerConfig& d) {
  if (!(d.temperature_C > -units::kZeroCelsius))
    throw ConfigError("doppler.temperature_C must be above absolute zero");
  if (!(d.atomic_mass_kg > 0.0))
    throw ConfigError("doppler.atomic_mass_kg must be positive");
  const double T = d.temperature_C + units::kZeroCelsius;
  return std::sqrt(units::kBoltzmann * T / d.atomic_mass_kg);
}

double doppler_fwhm(const DopplerConfig& d) {
  const double width_v = std::sqrt(8.0 * std::log(2.0)) * doppler_sigma(d);
  return units::doppler_shift(width_v, d.wavelength_nm);
}

VelocityGrid velocity_grid(const DopplerConfig& d) {
  if (d.n_velocity < 16)
    throw ConfigError("doppler.n_velocity must be at least 16");
  if (!(d.wavelength_nm > 0.0))
    throw ConfigError("doppler.wavelength_nm must be positive");
  const int n = d.n_velocity;

  // Golub-Welsch: nodes of the Hermite rule (weight exp(-x^2)) are the
  // eigenvalues of the symmetric Jacobi matrix.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& x = es.eigenvalues();

  // Christoffel numbers 1 / sum_k p_k(x)^2 from the orthonormal recurrence,
  // carried with the factor exp(-x^2 / 2) to stay in range.
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    double p_prev = 0.0;
    double p = std::pow(units::kPi, -0.25) * std::exp(-0.5 * xi * xi);
    double sum = p * p;
    for (int k = 0; k + 1 < n; ++k) {
      const double p_next =
          std::sqrt(2.0 / (k + 1)) * xi * p - std::sqrt(double(k) / (k + 1)) * p_prev;
      p_prev = p;
      p = p_next;
      sum += p * p;
    }
    w[i] = sum > 0.0 ? std::exp(-xi * xi) / sum : 0.0;
  }

  VelocityGrid grid;
  grid.sigma = doppler_sigma(d);
  const double wmax = *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(w[i] > 1e-16 * wmax)) continue;
    grid.nodes.push_back(std::sqrt(2.0) * grid.sigma * x[i]);
    grid.weights.push_back(w[i]);
    total += w[i];
  }
  for (double& wi : grid.weights) wi /= total;
  return grid;
}

// ---------------------------------------------------------------- enums

std::string to_string(ScanAxis axis) {
  switch (axis) {
  case ScanAxis::Laser2Detuning: return "laser2_detuning";
  case ScanAxis::GeneratorFrequency: return "generator_frequency";
  case ScanAxis::MagneticField: return "magnetic_field";
  }
  return "?";
}

ScanAxis scan_axis_from_string(const std::string& name) {
  if (name == "laser2_detuning") return ScanAxis::Laser2Detuning;
  if (name == "generator_frequency") return ScanAxis::GeneratorFrequency;
  if (name == "magnetic_field") return ScanAxis::MagneticField;
  throw ConfigError("unknown scan axis '" + name + "'");
}

std::string to_string(AxisOrigin origin) {
  return origin == AxisOrigin::Raman ? "raman" : "zero";
}

AxisOrigin axis_origin_from_string(const std::string& name) {
  if (name == "raman") return AxisOrigin::Raman;
  if (name == "zero") return AxisOrigin::Zero;
  throw ConfigError("unknown axis origin '" + name + "'");
}

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::Peak ? "peak" : "dip";
}

// ---------------------------------------------------------------- geometry

std::vector<double> grid_values(const ScanConfig& c) {
  std::vector<double> out;
  for (const Segment& s : c.segments) {
    if (!(s.step > 0.0) || !std::isfinite(s.step))
      throw ConfigError("scan.segments: step must be positive");
    if (!(s.stop >= s.start))
      throw ConfigError("scan.segments: stop must not be below start");
    const auto count =
        static_cast<long>(std::floor((s.stop - s.start) / s.step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(s.start + double(k) * s.step);
  }
  if (out.empty()) throw ConfigError("scan grid is empty");
  return out;
}

double raman_detuning(const LevelScheme& scheme, const FieldSet& fields) {
  return fields.laser1.carrier_detuning_MHz +
         scheme.level_energy(Manifold::Excited5P32, 2) -
         scheme.level_energy(Manifold::Excited5P32, 1);
}

double group_center(const LevelScheme& scheme, Laser laser) {
  const int ground_F = laser == Laser::Laser1 ? 2 : 1;
  const int ref_F = laser == Laser::Laser1 ? 2 : 1;
  double num = 0.0, den = 0.0;
  for (const DipoleCoupling& c : dipole_couplings(scheme)) {
    if (scheme.state(c.ground).F != ground_F) continue;
    const double s = c.amplitude * c.amplitude;
    num += s * scheme.energy(c.excited);
    den += s;
  }
  return num / den - scheme.level_energy(Manifold::Excited5P32, ref_F);
}

namespace {

struct PointSetup {
  double axis_value = 0.0;
  FieldSet fields;
  Eigen::Vector3d B = Eigen::Vector3d::Zero();
  FrameMode mode = FrameMode::Secular;
};

Eigen::Vector3d field_direction(const Eigen::Vector3d& B) {
  const double n = B.norm();
  return n > 0.0 ? Eigen::Vector3d(B / n) : Eigen::Vector3d::UnitZ();
}

PointSetup setup_point(const ScanConfig& c, double origin, double x) {
  PointSetup p;
  p.axis_value = x;
  p.fields = c.fields;
  p.B = c.B_gauss;
  double f = c.modulation.frequency_MHz;
  double laser2 = origin + c.fields.laser2.carrier_detuning_MHz;
  switch (c.axis) {
  case ScanAxis::Laser2Detuning: laser2 = origin + x; break;
  case ScanAxis::GeneratorFrequency: f = x; break;
  case ScanAxis::MagneticField: p.B = x * field_direction(c.B_gauss); break;
  }
  p.fields.laser2.carrier_detuning_MHz = laser2;
  if (f > 0.0) {
    LaserField& target = c.modulation.laser == Laser::Laser1 ? p.fields.laser1
                                                             : p.fields.laser2;
    target = apply_modulation(target, f, c.modulation.ratio);
  }
  p.mode = c.solver_mode;
  for (const auto& [lo, hi] : c.floquet_windows)
    if (x >= lo && x <= hi) p.mode = FrameMode::Floquet;
  return p;
}

struct TaskResult {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double residual = 0.0;
  bool floquet = false;
  int warnings = 0;
};

TaskResult solve_task(const LevelScheme& scheme, const PointSetup& p,
                      const RelaxationConfig& relax, double velocity) {
  const Generator g =
      build_generator(scheme, p.fields, p.B, relax, velocity, p.mode);
  TaskResult r;
  r.warnings = static_cast<int>(g.frame.warnings.size());
  if (g.L.time_dependent()) {
    const PeriodicSteadyState s = period_map_steady_state(g.L);
    const AbsorptionSample a = absorption(s, g.hamiltonian);
    r.alpha1 = a.laser1;
    r.alpha2 = a.laser2;
    r.residual = s.periodicity_residual;
    r.floquet = true;
  } else {
    const DensityMatrix rho = steady_state(g.L);
    const AbsorptionSample a = absorption(rho, g.hamiltonian);
    r.alpha1 = a.laser1;
    r.alpha2 = a.laser2;
    r.residual = rho.residual;
  }
  return r;
}

// Resolves the group-centre reference of laser 1.
ScanConfig resolved(const ScanConfig& c, const LevelScheme& scheme) {
  ScanConfig out = c;
  out.fields.laser1.carrier_detuning_MHz += group_center(scheme, Laser::Laser1);
  return out;
}

// Solves every (point, velocity) task. Results are stored per task and
// reduced afterwards in index order, so the thread count never changes the
// output.
std::vector<TaskResult> run_tasks(const ScanConfig& c, const LevelScheme& scheme,
                                  const std::vector<PointSetup>& points,
                                  const VelocityGrid& grid, bool parallel,
                                  int threads) {
  const long P = static_cast<long>(points.size());
  const long V = static_cast<long>(grid.nodes.size());
  const long total = P * V;
  std::vector<TaskResult> out(total);
  long first_error = total;
  std::exception_ptr error;

  const int nt = parallel ? (threads > 0 ? threads : omp_get_max_threads()) : 1;
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt) if (parallel)
  for (long k = 0; k < total; ++k) {
    try {
      out[k] = solve_task(scheme, points[k / V], c.relaxation, grid.nodes[k % V]);
    } catch (const SolverError& e) {
      std::ostringstream msg;
      msg << e.what() << " [grid point " << k / V << ", axis value "
          << points[k / V].axis_value << "; velocity node " << k % V << ", v = "
          << grid.nodes[k % V] << " m/s]";
#pragma omp critical(eitnsim_scan_error)
      if (k < first_error) {
        first_error = k;
        error = std::make_exception_ptr(SolverError(msg.str()));
      }
    } catch (...) {
#pragma omp critical(eitnsim_scan_error)
      if (k < first_error) {
        first_error = k;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

double origin_of(const ScanConfig& c, const LevelScheme& scheme) {
  return c.origin == AxisOrigin::Raman ? raman_detuning(scheme, c.fields) : 0.0;
}

SpectrumResult scan_impl(const ScanConfig& input, const LevelScheme& scheme,
                         const DopplerConfig& doppler, bool parallel,
                         int threads) {
  Eigen::setNbThreads(1);
  const ScanConfig c = resolved(input, scheme);
  const std::vector<double> axis = grid_values(c);
  const VelocityGrid grid = velocity_grid(doppler);
  const double origin = origin_of(c, scheme);

  std::vector<PointSetup> points;
  points.reserve(axis.size());
  for (double x : axis) points.push_back(setup_point(c, origin, x));

  SpectrumResult r;
  r.name = c.name;
  r.axis = c.axis;
  r.origin_MHz = origin;
  r.gamma_MHz = scheme.gamma();

  double scale = c.optical_depth_scale;
  if (!(scale > 0.0)) {
    if (!(c.baseline_fraction > 0.0 && c.baseline_fraction < 1.0))
      throw ConfigError("scan.baseline_fraction must lie in (0, 1)");
    PointSetup base = points.front();
    base.fields.laser2.intensity = 0.0;
    base.mode = FrameMode::Secular;
    const auto tasks = run_tasks(c, scheme, {base}, grid, parallel, threads);
    double alpha = 0.0;
    for (std::size_t j = 0; j < tasks.size(); ++j)
      alpha += grid.weights[j] * tasks[j].alpha1;
    if (!(alpha > 0.0))
      throw SolverError("baseline laser-1 absorption is not positive; set "
                        "scan.optical_depth_scale explicitly");
    scale = -std::log1p(-c.baseline_fraction) / alpha;
  }
  r.optical_depth_scale = scale;

  const auto tasks = run_tasks(c, scheme, points, grid, parallel, threads);
  const std::size_t V = grid.nodes.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    double a1 = 0.0, a2 = 0.0;
    PointInfo info;
    info.mode = FrameMode::Secular;
    for (std::size_t j = 0; j < V; ++j) {
      const TaskResult& t = tasks[i * V + j];
      a1 += grid.weights[j] * t.alpha1;
      a2 += grid.weights[j] * t.alpha2;
      info.max_residual = std::max(info.max_residual, t.residual);
      info.warnings += t.warnings;
      if (t.floquet) info.mode = FrameMode::Floquet;
    }
    r.axis_values.push_back(points[i].axis_value);
    r.alpha_laser1.push_back(a1);
    r.alpha_laser2.push_back(a2);
    r.absorption_laser1.push_back(-std::expm1(-scale * a1));
    r.absorption_laser2.push_back(-std::expm1(-scale * a2));
    r.points.push_back(info);
  }
  if (c.solver_mode == FrameMode::Floquet || !c.floquet_windows.empty()) {
    int degenerate = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i].mode == FrameMode::Floquet &&
          r.points[i].mode == FrameMode::Secular)
        ++degenerate;
    if (degenerate > 0)
      r.warnings.push_back(std::to_string(degenerate) +
                           " Floquet points had no driven sideband and were "
                           "solved in the secular frame");
  }
  return r;
}

} // namespace

SpectrumResult scan(const ScanConfig& config, const LevelScheme& scheme,
                    const DopplerConfig& doppler, const ScanOptions& options) {
  return scan_impl(config, scheme, doppler, options.parallel, options.threads);
}

SpectrumResult scan_serial(const ScanConfig& config, const LevelScheme& scheme,
                           const DopplerConfig& doppler) {
  return scan_impl(config, scheme, doppler, false, 1);
}

std::pair<double, double> doppler_average(const ScanConfig& input,
                                          const LevelScheme& scheme,
                                          const VelocityGrid& grid,
                                          double axis_value) {
  const ScanConfig c = resolved(input, scheme);
  const PointSetup p = setup_point(c, origin_of(c, scheme), axis_value);
  double a1 = 0.0, a2 = 0.0;
  for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
    const TaskResult t = solve_task(scheme, p, c.relaxation, grid.nodes[j]);
    a1 += grid.weights[j] * t.alpha1;
    a2 += grid.weights[j] * t.alpha2;
  }
  return {a1, a2};
}

// ---------------------------------------------------------------- features

namespace {

// Quadratic least-squares fit over `window` points around each sample;
// windows are shifted inward at the edges.
std::vector<double> savitzky_golay(const std::vector<double>& y, int window) {
  const int n = static_cast<int>(y.size());
  const int w = std::min(window, n);
  const int half = w / 2;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::clamp(i - half, 0, n - w);
    Eigen::MatrixXd A(w, 3);
    Eigen::VectorXd b(w);
    for (int k = 0; k < w; ++k) {
      const double t = double(lo + k - i);
      A(k, 0) = 1.0;
      A(k, 1) = t;
      A(k, 2) = t * t;
      b[k] = y[lo + k];
    }
    out[i] = A.colPivHouseholderQr().solve(b)[0];
  }
  return out;
}

double crossing(double x0, double y0, double x1, double y1, double level) {
  if (y1 == y0) return 0.5 * (x0 + x1);
  return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

// Vertex of the parabola through three equally spaced samples.
double vertex(const std::vector<double>& x, const std::vector<double>& v, int i) {
  const int n = static_cast<int>(v.size());
  if (i <= 0 || i >= n - 1) return x[i];
  const double d = v[i - 1] - 2.0 * v[i] + v[i + 1];
  if (d == 0.0) return x[i];
  const double t = 0.5 * (v[i - 1] - v[i + 1]) / d;
  return x[i] + std::clamp(t, -0.5, 0.5) * (x[i + 1] - x[i]);
}

// Width of the region around i where profile > level.
std::pair<double, bool> width_above(const std::vector<double>& x,
                                    const std::vector<double>& v, int i,
                                    double level) {
  const int n = static_cast<int>(v.size());
  int l = i, r = i;
  while (l > 0 && v[l - 1] > level) --l;
  while (r < n - 1 && v[r + 1] > level) ++r;
  if (l == 0 || r == n - 1) return {0.0, false};
  const double xl = crossing(x[l - 1], v[l - 1], x[l], v[l], level);
  const double xr = crossing(x[r], v[r], x[r + 1], v[r + 1], level);
  // Fewer than three samples above half height: width is not resolved.
  return {xr - xl, r - l + 1 >= 3};
}

void analyse_segment(const std::vector<double>& x, const std::vector<double>& y,
                     double linewidth, const DipOptions& opt,
                     std::vector<Feature>& out) {
  const int n = static_cast<int>(x.size());
  if (n < 5) return;
  const double step = (x.back() - x.front()) / (n - 1);
  int window = static_cast<int>(std::lround(opt.window_linewidths * linewidth / step));
  window = std::max(window, 5);
  if (window % 2 == 0) ++window;
  const std::vector<double> env = upper_envelope(y, window);

  const auto [emin, emax] = std::minmax_element(env.begin(), env.end());
  const double range = *emax - *emin;
  const double scale = std::max(std::abs(*emax), std::abs(*emin));

  // Peaks of the envelope with topographic prominence.
  if (range > 1e-9 * scale) {
    for (int i = 1; i < n - 1; ++i) {
      if (!(env[i] > env[i - 1] && env[i] >= env[i + 1])) continue;
      double left = env[i], right = env[i];
      for (int k = i - 1; k >= 0 && env[k] <= env[i]; --k) left = std::min(left, env[k]);
      for (int k = i + 1; k < n && env[k] <= env[i]; ++k) right = std::min(right, env[k]);
      const double prominence = env[i] - std::max(left, right);
      if (prominence < opt.min_peak_prominence * range) continue;
      Feature f;
      f.kind = FeatureKind::Peak;
      f.position = vertex(x, env, i);
      f.contrast = env[i] != 0.0 ? prominence / std::abs(env[i]) : 0.0;
      const auto [w, ok] = width_above(x, env, i, env[i] - 0.5 * prominence);
      f.resolved = ok;
      f.fwhm = ok ? w : std::numeric_limits<double>::quiet_NaN();
      out.push_back(f);
    }
  }

  // Dips: maxima of the relative depth below the envelope.
  std::vector<double> depth(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (env[i] > 0.0) depth[i] = (env[i] - y[i]) / env[i];
  std::vector<int> candidates;
  // A minimum on the segment edge is not a located dip.
  for (int i = 1; i < n - 1; ++i) {
    const bool left = depth[i] > depth[i - 1];
    const bool right = depth[i] >= depth[i + 1];
    if (left && right && depth[i] >= opt.min_dip_contrast) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](int a, int b) { return depth[a] > depth[b]; });
  std::vector<std::pair<double, double>> taken;
  std::vector<Feature> dips;
  for (int i : candidates) {
    const double half = 0.5 * depth[i];
    int l = i, r = i;
    while (l > 0 && depth[l - 1] > half) --l;
    while (r < n - 1 && depth[r + 1] > half) ++r;
    const double pos = vertex(x, depth, i);
    bool inside = false;
    for (const auto& [a, b] : taken) inside |= pos >= a && pos <= b;
    if (inside) continue;
    taken.emplace_back(x[l], x[r]);
    const auto [w, ok] = width_above(x, depth, i, half);
    if (ok && w > opt.max_dip_width_fraction * window * step) continue;
    Feature f;
    f.kind = FeatureKind::Dip;
    f.position = pos;
    f.contrast = depth[i];
    f.resolved = ok;
    f.fwhm = ok ? w : std::numeric_limits<double>::quiet_NaN();
    dips.push_back(f);
  }
  out.insert(out.end(), dips.begin(), dips.end());
}

} // namespace

std::vector<double> upper_envelope(const std::vector<double>& y, int window) {
  std::vector<double> clipped = y;
  std::vector<double> env = savitzky_golay(clipped, window);
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  for (int it = 0; it < 200; ++it) {
    for (std::size_t i = 0; i < y.size(); ++i) clipped[i] = std::max(y[i], env[i]);
    std::vector<double> next = savitzky_golay(clipped, window);
    double change = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      change = std::max(change, std::abs(next[i] - env[i]));
    env.swap(next);
    if (change <= 1e-12 * scale) break;
  }
  return env;
}

std::vector<Feature> dip_metrics(const std::vector<double>& x,
                                 const std::vector<double>& y, double linewidth,
                                 const DipOptions& options) {
  if (x.size() != y.size())
    throw ValidationError("dip_metrics: axis and values differ in length");
  std::vector<Feature> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    bool split = i == x.size();
    if (!split && i >= begin + 2) {
      const double prev = x[i - 1] - x[i - 2];
      const double cur = x[i] - x[i - 1];
      split = cur <= 0.0 || std::abs(cur - prev) > 0.01 * std::abs(prev);
    } else if (!split) {
      split = x[i] <= x[i - 1];
    }
    if (!split) continue;
    const std::vector<double> xs(x.begin() + begin, x.begin() + i);
    const std::vector<double> ys(y.begin() + begin, y.begin() + i);
    analyse_segment(xs, ys, linewidth, options, out);
    begin = i;
  }
  std::stable_sort(out.begin(), out.end(), [](const Feature& a, const Feature& b) {
    return a.position < b.position;
  });
  return out;
}

std::vector<Feature> dip_metrics(const SpectrumResult& result,
                                 const DipOptions& options) {
  return dip_metrics(result.axis_values, result.absorption_laser1,
                     result.gamma_MHz, options);
}

} // namespace eitnsim
