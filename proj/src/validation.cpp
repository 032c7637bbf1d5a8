#include "eitnsim/validation.hpp"

#include "eitnsim/error.hpp"
#include "eitnsim/solver.hpp"
#include "eitnsim/spectrum.hpp"
#include "eitnsim/units.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace eitnsim {
namespace {

using units::angular;

constexpr double kRaman = 156.9;

Superoperator static_superop(const Eigen::MatrixXcd& H, const SparseMatrixC& D) {
  Superoperator L;
  L.n = static_cast<int>(H.rows());
  L.static_part = commutator_superop(H) + D;
  L.static_part.makeCompressed();
  return L;
}

FieldSet scalar_fields(double d1, double d2, double i1, double i2) {
  FieldSet fields;
  fields.laser1 = make_field(Laser::Laser1, d1, i1, {1, 0, 0}, 1.0);
  fields.laser2 = make_field(Laser::Laser2, d2, i2, {0, 1, 0}, 1.0);
  return fields;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::MatrixXcd random_density(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

Eigen::Vector3cd random_polarization(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3cd p;
  for (int i = 0; i < 3; ++i) p(i) = Complex(g(rng), g(rng));
  return p.normalized();
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d axis(g(rng), g(rng), g(rng));
  return Eigen::AngleAxisd(uniform(rng, 0.3, 3.0), axis.normalized())
      .toRotationMatrix();
}

LevelScheme scheme_of(SchemeMode mode) {
  LevelSchemeConfig c;
  c.mode = mode;
  return build_level_scheme(c);
}

double decay_completeness_error() {
  const LevelScheme s = scheme_of(SchemeMode::FullZeeman24);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(s.size(), s.size());
  for (const auto& ch : decay_channels(s)) sum += ch.op.transpose() * ch.op;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(s.size(), s.size());
  for (int e : s.excited_indices()) expected(e, e) = s.gamma();
  return (sum - expected).cwiseAbs().maxCoeff() / s.gamma();
}

// Solves the FullZeeman24 steady state at 10 G transverse over a few
// velocity classes and returns the worst invariant violation (0 if all hold).
double transverse_invariant_error() {
  const LevelScheme s = scheme_of(SchemeMode::FullZeeman24);
  FieldSet fields = scalar_fields(-78.45, 78.45, 2.0, 3.0);
  fields.laser1 = apply_modulation(fields.laser1, kRaman, 0.1);
  double worst = 0.0;
  for (double v : {-60.0, 0.0, 45.0}) {
    const Generator g = build_generator(s, fields, {10, 0, 0}, {0.01, 1.0, false},
                                        v, FrameMode::Secular);
    const DensityMatrix rho = steady_state(g.L);
    rho.check_invariants();
    worst = std::max({worst, std::abs(rho.rho.trace() - 1.0),
                      std::max(0.0, -rho.min_eigenvalue()), rho.residual});
  }
  return worst;
}

CheckResult timed(const std::string& name, double threshold,
                  const std::function<double()>& body, bool upper = true) {
  CheckResult r;
  r.name = name;
  r.threshold = threshold;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.value = body();
    r.passed = upper ? r.value <= threshold : r.value >= threshold;
  } catch (const SolverError& e) {
    r.passed = false;
    r.value = std::nan("");
    r.detail = e.what();
  }
  r.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

} // namespace

double two_level_oracle_error(double gamma_scale) {
  const double gamma = angular(6.0);
  double worst = 0.0;
  for (double delta : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    for (double omega : {0.05, 0.3, 1.0, 2.5, 10.0}) {
      const double D = delta * gamma, W = omega * gamma;
      Eigen::MatrixXcd H(2, 2);
      H << 0.0, 0.5 * W, 0.5 * W, -D;
      Eigen::MatrixXcd lower = Eigen::MatrixXcd::Zero(2, 2);
      lower(0, 1) = std::sqrt(gamma * gamma_scale);
      const DensityMatrix rho = steady_state(static_superop(H, lindblad_superop(lower)));
      const double exact =
          0.25 * W * W / (D * D + 0.25 * gamma * gamma + 0.5 * W * W);
      worst = std::max(worst, std::abs(rho.rho(1, 1).real() - exact));
    }
  }
  return worst;
}

double dark_state_ratio() {
  // g1 = 0, g2 = 1, e = 2. Laser 1 drives g2-e, laser 2 drives g1-e, both on
  // one-photon resonance; `raman` detunes g1.
  const double gamma = angular(6.0);
  const double w1 = gamma, w2 = gamma;
  auto laser1_absorption = [&](double raman_MHz) {
    Hamiltonian H;
    H.n = 3;
    H.gamma = gamma;
    H.static_part = Eigen::MatrixXcd::Zero(3, 3);
    H.static_part(0, 0) = angular(raman_MHz);
    H.rabi_weight = {w1 * w1, w2 * w2};
    H.couplings = {{Laser::Laser1, 0, 0, 2, 1, Complex(0.5 * w1)},
                   {Laser::Laser2, 0, 0, 2, 0, Complex(0.5 * w2)}};
    for (const auto& c : H.couplings) {
      H.static_part(c.excited, c.ground) += c.value;
      H.static_part(c.ground, c.excited) += std::conj(c.value);
    }
    SparseMatrixC D = transit_superop(3, {0, 1}, angular(1e-7));
    for (int g : {0, 1}) {
      Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(3, 3);
      op(g, 2) = std::sqrt(0.5 * gamma);
      D += lindblad_superop(op);
    }
    return absorption(steady_state(static_superop(H.static_part, D)), H).laser1;
  };
  return std::abs(laser1_absorption(0.0)) / laser1_absorption(20.0);
}

double steady_vs_propagation(int draws, std::uint64_t seed) {
  const LevelScheme s = scheme_of(SchemeMode::ScalarN4);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double d1 = -78.45 + uniform(rng, -20, 20);
    const double d2 = d1 + kRaman + uniform(rng, -20, 20);
    const FieldSet fields =
        scalar_fields(d1, d2, uniform(rng, 2, 30), uniform(rng, 2, 30));
    const RelaxationConfig relax{uniform(rng, 0.2, 1.0), uniform(rng, 0.0, 1.0),
                                 false};
    const double v = uniform(rng, -50, 50);
    const Generator g =
        build_generator(s, fields, Eigen::Vector3d::Zero(), relax, v,
                        FrameMode::Secular);
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(s.size(), s.size());
    for (int i : s.ground_indices()) rho0(i, i) = 1.0 / s.ground_indices().size();
    const double t = 25.0 / angular(relax.gamma_t_MHz);
    const DensityMatrix late = propagate(g.L, rho0, t, {1e-11, 1e-14, 1e-16, 1e-7});
    const DensityMatrix ss = steady_state(g.L);
    worst = std::max(worst, trace_norm(late.rho - ss.rho));
  }
  return worst;
}

double floquet_secular_ratio0_difference() {
  const LevelScheme s = scheme_of(SchemeMode::ScalarN4);
  FieldSet fields = scalar_fields(-78.45, 78.45, 20.0, 30.0);
  fields.laser1 = apply_modulation(fields.laser1, kRaman, 0.0);
  double worst = 0.0;
  for (double v : {-40.0, 0.0, 25.0}) {
    const Generator sec = build_generator(s, fields, Eigen::Vector3d::Zero(),
                                          {0.01, 1.0, false}, v, FrameMode::Secular);
    const Generator flo = build_generator(s, fields, Eigen::Vector3d::Zero(),
                                          {0.01, 1.0, false}, v, FrameMode::Floquet);
    const SparseMatrixC diff = flo.L.static_part - sec.L.static_part;
    double gen = diff.nonZeros() ? diff.coeffs().cwiseAbs().maxCoeff() : 0.0;
    for (const auto& [m, op] : flo.L.harmonics)
      if (op.nonZeros()) gen = std::max(gen, op.coeffs().cwiseAbs().maxCoeff());
    const DensityMatrix a = steady_state(sec.L);
    const PeriodicSteadyState b = period_map_steady_state(flo.L, kRaman);
    worst = std::max({worst, gen, trace_norm(a.rho - b.rho.rho)});
  }
  return worst;
}

MonodromySpectrum monodromy_spectrum() {
  const LevelScheme s = scheme_of(SchemeMode::ScalarN4);
  FieldSet fields = scalar_fields(-78.45, 78.45, 20.0, 30.0);
  fields.laser1 = apply_modulation(fields.laser1, kRaman, 0.1);
  MonodromySpectrum out;
  out.unit_eigenvalues = 1;
  for (double v : {-60.0, 0.0, 30.0}) {
    const Generator g = build_generator(s, fields, Eigen::Vector3d::Zero(),
                                        {0.01, 1.0, false}, v, FrameMode::Floquet);
    if (!g.L.time_dependent())
      throw SolverError("monodromy check: generator is not time dependent");
    const Eigen::VectorXcd ev =
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(monodromy(g.L, kRaman), false)
            .eigenvalues();
    int units = 0;
    for (int i = 0; i < ev.size(); ++i) {
      out.max_modulus = std::max(out.max_modulus, std::abs(ev(i)));
      if (std::abs(std::abs(ev(i)) - 1.0) < 1e-10) ++units;
    }
    if (units != 1) out.unit_eigenvalues = units;
  }
  return out;
}

double generator_property_error(bool full_zeeman, std::uint64_t seed) {
  const LevelScheme s =
      scheme_of(full_zeeman ? SchemeMode::FullZeeman24 : SchemeMode::ScalarN4);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 6; ++k) {
    FieldSet fields = scalar_fields(-78.45 + uniform(rng, -30, 30),
                                    78.45 + uniform(rng, -30, 30),
                                    uniform(rng, 1, 30), uniform(rng, 1, 30));
    fields.laser1.polarization = random_polarization(rng);
    fields.laser2.polarization = random_polarization(rng);
    fields.laser1 = apply_modulation(fields.laser1, kRaman, uniform(rng, 0.0, 0.3));
    Eigen::Vector3d B(uniform(rng, -3, 3), uniform(rng, -3, 3),
                      uniform(rng, -3, 3));
    if (!full_zeeman) B.setZero();
    const FrameMode mode = (k % 2 == 1 && !full_zeeman) ? FrameMode::Floquet
                                                        : FrameMode::Secular;
    const Generator g = build_generator(s, fields, B,
                                        {uniform(rng, 0.01, 1), uniform(rng, 0, 1),
                                         k % 3 == 2},
                                        uniform(rng, -100, 100), mode);
    const double scale = g.L.static_part.coeffs().cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd rho = random_density(s.size(), rng);
    const Eigen::MatrixXcd out =
        unvectorize(g.L.apply(vectorize(rho), uniform(rng, 0.0, 0.01)), s.size());
    worst = std::max({worst, std::abs(out.trace()) / scale,
                      (out - out.adjoint()).cwiseAbs().maxCoeff() / scale});
  }
  return worst;
}

double covariance_error(std::uint64_t seed) {
  const LevelScheme s = scheme_of(SchemeMode::FullZeeman24);
  std::mt19937_64 rng(seed);
  FieldSet fields = scalar_fields(-78.45 + uniform(rng, -10, 10), 78.45, 2.0, 3.0);
  fields.laser1.polarization = random_polarization(rng);
  fields.laser2.polarization = random_polarization(rng);
  const Eigen::Vector3d B(uniform(rng, -2, 2), uniform(rng, -2, 2), 1.5);
  const Eigen::Matrix3d R = random_rotation(rng);
  FieldSet rotated = fields;
  rotated.laser1.polarization = R.cast<Complex>() * fields.laser1.polarization;
  rotated.laser2.polarization = R.cast<Complex>() * fields.laser2.polarization;
  const RelaxationConfig relax{0.05, 0.5, false};
  double worst = 0.0;
  for (double v : {0.0, 20.0}) {
    const Generator a = build_generator(s, fields, B, relax, v, FrameMode::Secular);
    const Generator b =
        build_generator(s, rotated, R * B, relax, v, FrameMode::Secular);
    const AbsorptionSample x = absorption(steady_state(a.L), a.hamiltonian);
    const AbsorptionSample y = absorption(steady_state(b.L), b.hamiltonian);
    worst = std::max({worst, std::abs(x.laser1 - y.laser1) / std::abs(x.laser1),
                      std::abs(x.laser2 - y.laser2) / std::abs(x.laser2)});
  }
  return worst;
}

double doppler_fwhm_deviation() {
  DopplerConfig d;
  d.temperature_C = 300.0 - units::kZeroCelsius;
  d.n_velocity = 64;
  const VelocityGrid g = velocity_grid(d);
  double m2 = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    m2 += g.weights[i] * g.nodes[i] * g.nodes[i];
  const double fwhm =
      units::doppler_shift(std::sqrt(8.0 * std::log(2.0) * m2), d.wavelength_nm);
  return std::abs(fwhm - 520.0) / 520.0;
}

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
  double gamma_scale = 1.0;
  if (options.fault == "gamma")
    gamma_scale = 1.001;
  else if (!options.fault.empty())
    throw ConfigError("unknown fault '" + options.fault + "'");

  std::vector<CheckResult> out;
  out.push_back(timed("two_level_oracle", 1e-8,
                      [&] { return two_level_oracle_error(gamma_scale); }));
  out.push_back(timed("doppler_fwhm_300K", 0.10, [] { return doppler_fwhm_deviation(); }));
  out.push_back(timed("lambda_dark_state", 1e-6, [] { return dark_state_ratio(); }));
  out.push_back(timed("steady_state_vs_propagation", 1e-6,
                      [&] { return steady_vs_propagation(50, options.seed); }));
  out.push_back(timed("floquet_ratio0_equals_secular", 1e-8,
                      [] { return floquet_secular_ratio0_difference(); }));
  {
    MonodromySpectrum m;
    CheckResult r = timed("monodromy_contractive", 1.0 + 1e-8, [&] {
      m = monodromy_spectrum();
      return m.max_modulus;
    });
    std::ostringstream d;
    d << "unit-modulus eigenvalues: " << m.unit_eigenvalues;
    if (r.detail.empty()) r.detail = d.str();
    r.passed = r.passed && m.unit_eigenvalues == 1;
    out.push_back(r);
  }
  out.push_back(timed("generator_properties_scalar", 1e-12,
                      [&] { return generator_property_error(false, options.seed); }));

  if (options.level == ValidationLevel::Full) {
    out.push_back(timed("generator_properties_zeeman", 1e-12, [&] {
      return generator_property_error(true, options.seed);
    }));
    out.push_back(timed("decay_completeness", 1e-12,
                        [] { return decay_completeness_error(); }));
    out.push_back(timed("steady_state_invariants_10G", 1e-8,
                        [] { return transverse_invariant_error(); }));
    out.push_back(timed("rotation_covariance", 1e-8,
                        [&] { return covariance_error(options.seed); }));
  }
  return out;
}

} // namespace eitnsim
