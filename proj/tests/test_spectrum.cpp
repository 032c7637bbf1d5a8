#include "eitnsim/error.hpp"
#include "eitnsim/scenario.hpp"
#include "eitnsim/spectrum.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>

using namespace eitnsim;

namespace {

Scenario small_scan() {
  Scenario s = scenario("fig2b");
  s.doppler.n_velocity = 48;
  s.scan.segments = {{-10.0, 10.0, 1.0}};
  return s;
}

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> x;
  for (double v = lo; v <= hi + 1e-9; v += step) x.push_back(v);
  return x;
}

double lorentz(double x, double x0, double fwhm) {
  const double h = 0.5 * fwhm;
  return h * h / ((x - x0) * (x - x0) + h * h);
}

} // namespace

TEST_CASE("velocity quadrature reproduces the Maxwell-Boltzmann moments") {
  DopplerConfig d;
  d.n_velocity = 128;
  const VelocityGrid g = velocity_grid(d);
  double w = 0.0, m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double v = g.nodes[i];
    w += g.weights[i];
    m1 += g.weights[i] * v;
    m2 += g.weights[i] * v * v;
    m4 += g.weights[i] * v * v * v * v;
  }
  const double s2 = g.sigma * g.sigma;
  CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(m1) < 1e-10 * g.sigma);
  CHECK(m2 == doctest::Approx(s2).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3 * s2 * s2).epsilon(1e-12));
  CHECK(g.nodes.size() < 128); // negligible tail nodes are dropped
  CHECK_THROWS_AS(velocity_grid({30.0, units::kRb87Mass, 780.0, 4}), ConfigError);
}

TEST_CASE("Doppler FWHM at 300 K") {
  DopplerConfig d;
  d.temperature_C = 300.0 - units::kZeroCelsius;
  // sqrt(8 ln2 kT/m) / lambda for 87Rb.
  CHECK(doppler_fwhm(d) == doctest::Approx(511.6).epsilon(2e-3));
  CHECK(std::abs(doppler_fwhm(d) - 520.0) / 520.0 < 0.10);
}

TEST_CASE("grid values") {
  ScanConfig c;
  c.segments = {{-1.0, 1.0, 0.5}, {10.0, 10.0, 1.0}};
  const auto v = grid_values(c);
  CHECK(v == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0, 10.0});
  c.segments = {{0.0, 1.0, 0.0}};
  CHECK_THROWS_AS(grid_values(c), ConfigError);
  c.segments = {};
  CHECK_THROWS_AS(grid_values(c), ConfigError);
}

TEST_CASE("Raman point and transition group centres") {
  LevelSchemeConfig cfg;
  const LevelScheme s = build_level_scheme(cfg);
  FieldSet f;
  f.laser1 = make_field(Laser::Laser1, -10.0, 1, {1, 0, 0}, 0);
  CHECK(raman_detuning(s, f) == doctest::Approx(146.9));
  CHECK(group_center(s, Laser::Laser1) == doctest::Approx(-78.45));
}

TEST_CASE("a Lorentzian dip is measured within 2%") {
  const auto x = axis(-60.0, 60.0, 0.25);
  std::vector<double> y;
  for (double v : x) y.push_back(0.8 + 0.001 * v - 0.25 * lorentz(v, 3.0, 4.0));
  const auto f = dip_metrics(x, y, 6.0);
  REQUIRE(f.size() == 1);
  CHECK(f[0].kind == FeatureKind::Dip);
  CHECK(f[0].position == doctest::Approx(3.0).epsilon(0.01));
  CHECK(f[0].fwhm == doctest::Approx(4.0).epsilon(0.02));
  CHECK(f[0].contrast == doctest::Approx(0.25 / 0.803).epsilon(0.05));
}

TEST_CASE("a flat spectrum has no features") {
  const auto x = axis(-50.0, 50.0, 0.5);
  CHECK(dip_metrics(x, std::vector<double>(x.size(), 0.3), 6.0).empty());
  std::vector<double> slope;
  for (double v : x) slope.push_back(0.3 + 1e-3 * v);
  CHECK(dip_metrics(x, slope, 6.0).empty());
}

TEST_CASE("peaks with a dip on top") {
  const auto x = axis(-300.0, 300.0, 0.5);
  std::vector<double> y;
  for (double v : x)
    y.push_back(0.1 + 0.5 * lorentz(v, -150, 50) + 0.5 * lorentz(v, 150, 50) -
                0.05 * lorentz(v, 152, 5));
  const auto f = dip_metrics(x, y, 6.0);
  int peaks = 0, dips = 0;
  for (const auto& e : f) {
    if (e.kind == FeatureKind::Peak) {
      ++peaks;
      CHECK(std::abs(std::abs(e.position) - 150.0) < 2.0);
    } else {
      ++dips;
      CHECK(e.position == doctest::Approx(152.0).epsilon(0.003));
    }
  }
  CHECK(peaks == 2);
  CHECK(dips == 1);
}

TEST_CASE("unequal steps are analysed as separate segments") {
  auto x = axis(-20.0, 20.0, 0.5);
  const auto x2 = axis(100.0, 140.0, 1.0);
  x.insert(x.end(), x2.begin(), x2.end());
  std::vector<double> y;
  for (double v : x) y.push_back(1.0 - 0.3 * lorentz(v, 0.0, 3.0) - 0.3 * lorentz(v, 120.0, 4.0));
  const auto f = dip_metrics(x, y, 6.0);
  REQUIRE(f.size() == 2);
  CHECK(f[0].position == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(f[1].position == doctest::Approx(120.0).epsilon(1e-3));
}

TEST_CASE("parallel scan is bit-identical to the serial reference") {
  const Scenario s = small_scan();
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const SpectrumResult a = scan(s.scan, scheme, s.doppler, {4, true});
  const SpectrumResult b = scan_serial(s.scan, scheme, s.doppler);
  const SpectrumResult c = scan(s.scan, scheme, s.doppler, {3, true});
  CHECK(a.absorption_laser1 == b.absorption_laser1);
  CHECK(a.absorption_laser2 == b.absorption_laser2);
  CHECK(a.absorption_laser1 == c.absorption_laser1);
  CHECK(a.size() == 21);
}

TEST_CASE("auto calibration sets the far baseline") {
  Scenario s = scenario("fig2a");
  s.doppler.n_velocity = 48;
  s.scan.segments = {{-750.0, -750.0, 1.0}};
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const SpectrumResult r = scan(s.scan, scheme, s.doppler);
  CHECK(r.optical_depth_scale > 0.0);
  CHECK(r.absorption_laser1[0] > 0.0);
  CHECK(r.absorption_laser1[0] < 0.2);
  // An explicit scale is used as given.
  s.scan.optical_depth_scale = 2.0 * r.optical_depth_scale;
  const SpectrumResult r2 = scan(s.scan, scheme, s.doppler);
  CHECK(r2.optical_depth_scale == doctest::Approx(2.0 * r.optical_depth_scale));
  CHECK(r2.alpha_laser1[0] == doctest::Approx(r.alpha_laser1[0]));
}

TEST_CASE("Floquet windows solve their points in the Floquet frame") {
  Scenario s = small_scan();
  s.scan.floquet_windows = {{-2.0, 2.0}};
  s.doppler.n_velocity = 16;
  s.scan.segments = {{-3.0, 3.0, 1.0}};
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const SpectrumResult r = scan(s.scan, scheme, s.doppler);
  CHECK(r.points[0].mode == FrameMode::Secular);
  CHECK(r.points[3].mode == FrameMode::Floquet);
}

TEST_CASE("modulation frequency axis") {
  Scenario s = small_scan();
  s.doppler.n_velocity = 16;
  s.scan.axis = ScanAxis::GeneratorFrequency;
  s.scan.segments = {{150.0, 160.0, 5.0}};
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const SpectrumResult r = scan(s.scan, scheme, s.doppler);
  CHECK(r.size() == 3);
  CHECK(r.absorption_laser1[0] != r.absorption_laser1[1]);
}
