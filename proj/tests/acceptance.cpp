// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed
// here and never adapted to the measured values.
#include "eitnsim/atom.hpp"
#include "eitnsim/field.hpp"
#include "eitnsim/output.hpp"
#include "eitnsim/scenario.hpp"
#include "eitnsim/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <set>
#include <string>
#include <vector>

using namespace eitnsim;

namespace {

constexpr double kDopplerTarget = 520.0;   // MHz
constexpr double kDopplerTol = 0.10;       // relative
constexpr double kDoppler1Seconds = 1.0;
constexpr double kNarrowDip = 6.0;         // MHz
constexpr double kFig2aSeconds = 120.0;
constexpr double kFig2bSeconds = 300.0;
constexpr double kSlopeTol = 0.02;
constexpr double kSideRatio = 0.20;
constexpr double kMainChange = 0.30;
constexpr double kLongitudinalSeconds = 1800.0;
constexpr double kSplittingTol = 0.15;
constexpr double kValidateSeconds = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Timed {
  SpectrumResult result;
  double seconds = 0.0;
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Timed run(const Scenario& s) {
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.result = scan(s.scan, scheme, s.doppler);
  t.seconds = since(t0);
  return t;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<Feature> only(const std::vector<Feature>& all, FeatureKind kind) {
  std::vector<Feature> out;
  for (const Feature& f : all)
    if (f.kind == kind) out.push_back(f);
  std::sort(out.begin(), out.end(),
            [](const Feature& a, const Feature& b) { return a.position < b.position; });
  return out;
}

std::string positions(const std::vector<Feature>& fs) {
  std::string s = "[";
  for (std::size_t i = 0; i < fs.size(); ++i)
    s += (i ? " " : "") + fmt("%.2f", fs[i].position);
  return s + "]";
}

double grid_step(const Scenario& s) { return s.scan.segments.front().step; }

// Strongest dip inside [lo, hi], or a zero-contrast placeholder.
Feature strongest_dip(const std::vector<Feature>& fs, double lo, double hi) {
  Feature best;
  best.contrast = 0.0;
  best.position = std::numeric_limits<double>::quiet_NaN();
  for (const Feature& f : fs)
    if (f.kind == FeatureKind::Dip && f.position >= lo && f.position <= hi &&
        f.contrast > best.contrast)
      best = f;
  return best;
}

// --------------------------------------------------------------- criteria

Outcome doppler_width() {
  const auto t0 = std::chrono::steady_clock::now();
  DopplerConfig d;
  d.temperature_C = 300.0 - 273.15;
  const double fwhm = doppler_fwhm(d);
  const double dev = doppler_fwhm_deviation();
  const double secs = since(t0);
  return {dev <= kDopplerTol && secs < kDoppler1Seconds,
          "FWHM " + fmt("%.1f", fwhm) + " MHz (target " + fmt("%.0f", kDopplerTarget) + " +-10%), quadrature deviation " +
              fmt("%.4f", dev) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome peak_structure() {
  const Scenario s = scenario("fig2a");
  const Timed t = run(s);
  const auto features = dip_metrics(t.result);
  const auto peaks = only(features, FeatureKind::Peak);
  const auto dips = only(features, FeatureKind::Dip);
  const double step = grid_step(s);

  // Configured excited-state intervals (F'=0-1 and F'=1-2).
  const HyperfineIntervals hf = s.scheme.intervals;
  std::vector<double> expected = {hf.excited_0_1, hf.excited_1_2};
  std::vector<double> spacing;
  for (std::size_t i = 1; i < peaks.size(); ++i)
    spacing.push_back(peaks[i].position - peaks[i - 1].position);
  std::sort(spacing.begin(), spacing.end());
  std::sort(expected.begin(), expected.end());
  bool spacing_ok = spacing.size() == expected.size();
  for (std::size_t i = 0; spacing_ok && i < spacing.size(); ++i)
    spacing_ok = std::abs(spacing[i] - expected[i]) <= step;

  const bool dip_ok = dips.size() == 1 && std::abs(dips[0].position) <= step;

  Scenario weak = s;
  weak.scan.fields.laser1.intensity /= 10.0;
  weak.scan.fields.laser2.intensity /= 10.0;
  weak.scan.segments = {{-20.0, 20.0, 0.1}};
  const Timed tw = run(weak);
  const Feature narrow = strongest_dip(dip_metrics(tw.result), -step, step);
  const bool narrow_ok = weak.scan.relaxation.gamma_L_MHz <= 1.0 && narrow.contrast > 0.0 &&
                         narrow.resolved && narrow.fwhm < kNarrowDip;

  std::string sp;
  for (double d : spacing) sp += fmt(" %.2f", d);
  return {peaks.size() == 3 && spacing_ok && dip_ok && narrow_ok && t.seconds < kFig2aSeconds,
          std::to_string(peaks.size()) + " peaks " + positions(peaks) + ", spacings" + sp +
              " vs " + fmt("%.3f", expected[0]) + " and " + fmt("%.3f", expected[1]) +
              " (+-" + fmt("%.2f", step) + "); " + std::to_string(dips.size()) + " dip " +
              positions(dips) + "; weak-field dip FWHM " + fmt("%.2f", narrow.fwhm) +
              " MHz; scan " + fmt("%.0f", t.seconds) + " s"};
}

Timed fig2b_run;

Outcome nscheme_dips() {
  const Scenario s = scenario("fig2b");
  fig2b_run = run(s);
  const auto dips = only(dip_metrics(fig2b_run.result), FeatureKind::Dip);
  const double f = s.scan.modulation.frequency_MHz;
  const double step = grid_step(s);
  bool ok = dips.size() == 3;
  std::string disp;
  if (ok) {
    const double main = dips[1].position;
    const double left = dips[0].position - main, right = dips[2].position - main;
    ok = std::abs(left + f) <= step && std::abs(right - f) <= step;
    disp = ", displacements " + fmt("%.2f", left) + " and " + fmt("%+.2f", right);
  }
  return {ok && fig2b_run.seconds < kFig2bSeconds,
          std::to_string(dips.size()) + " dips " + positions(dips) + disp + " vs +-" +
              fmt("%.1f", f) + " (+-" + fmt("%.2f", step) + "); scan " +
              fmt("%.0f", fig2b_run.seconds) + " s"};
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome dip_tracking() {
  const Scenario s = scenario("fig2c");
  std::vector<double> fs, left, right;
  for (double f : s.sweep.values) {
    Scenario one = s;
    one.scan = apply_sweep(s.scan, s.sweep.parameter, f);
    const auto features = dip_metrics(run(one).result);
    const Feature l = strongest_dip(features, -1e9, -100.0);
    const Feature r = strongest_dip(features, 100.0, 1e9);
    if (l.contrast > 0.0 && r.contrast > 0.0) {
      fs.push_back(f);
      left.push_back(l.position);
      right.push_back(r.position);
    }
  }
  if (fs.size() < 3)
    return {false, "side dips found for only " + std::to_string(fs.size()) + " of " +
                       std::to_string(s.sweep.values.size()) + " frequencies"};
  const double sl = fitted_slope(fs, left), sr = fitted_slope(fs, right);
  return {fs.size() == s.sweep.values.size() && std::abs(sl + 1.0) <= kSlopeTol &&
              std::abs(sr - 1.0) <= kSlopeTol,
          "slopes " + fmt("%.4f", sl) + " (left) and " + fmt("%.4f", sr) +
              " (right) over " + std::to_string(fs.size()) + " frequencies, tolerance " +
              fmt("%.2f", kSlopeTol)};
}

Outcome longitudinal_field() {
  const Scenario s = scenario("longitudinalB");
  const double f = s.scan.modulation.frequency_MHz;
  const auto t0 = std::chrono::steady_clock::now();
  struct Contrast {
    double side = 0.0, main = 0.0;
  };
  auto measure = [&](double B) {
    Scenario one = s;
    one.scan = apply_sweep(s.scan, s.sweep.parameter, B);
    const auto features = dip_metrics(run(one).result);
    Contrast c;
    c.side = 0.5 * (strongest_dip(features, -f - 30, -f + 30).contrast +
                    strongest_dip(features, f - 30, f + 30).contrast);
    c.main = strongest_dip(features, -30, 30).contrast;
    return c;
  };
  const Contrast c0 = measure(0.0), c25 = measure(2.5);
  const double secs = since(t0);
  const double side_ratio = c0.side > 0.0 ? c25.side / c0.side : 1.0;
  const double main_change = c0.main > 0.0 ? std::abs(c25.main - c0.main) / c0.main : 1.0;
  return {c0.side > 0.0 && side_ratio < kSideRatio && main_change < kMainChange &&
              secs < kLongitudinalSeconds,
          "side-dip contrast " + fmt("%.4f", c0.side) + " -> " + fmt("%.4f", c25.side) +
              " (ratio " + fmt("%.3f", side_ratio) + ", limit " + fmt("%.2f", kSideRatio) +
              "), main-dip contrast " + fmt("%.4f", c0.main) + " -> " +
              fmt("%.4f", c25.main) + " (change " + fmt("%.3f", main_change) +
              ", limit " + fmt("%.2f", kMainChange) + "); " + fmt("%.0f", secs) + " s"};
}

// Two-photon (Raman) shifts of all ground-sublevel pairs linked through a
// common excited sublevel by the polarization components present in the
// field frame.
std::vector<double> raman_shifts(const Scenario& s) {
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const Eigen::Vector3d B = s.scan.B_gauss;
  const double b = B.norm();
  const auto c1 = polarization_components(s.scan.fields.laser1.polarization, B / b);
  const auto c2 = polarization_components(s.scan.fields.laser2.polarization, B / b);
  const int F1 = s.scan.fields.laser1.target_ground_F;
  const int F2 = s.scan.fields.laser2.target_ground_F;
  const auto couplings = dipole_couplings(scheme);
  std::vector<double> shifts;
  for (const auto& a : couplings) {
    const AtomicState& ga = scheme.state(a.ground);
    if (ga.F != F1 || std::abs(c1[a.q + 1]) < 1e-9 || a.amplitude == 0.0) continue;
    for (const auto& e : couplings) {
      const AtomicState& gb = scheme.state(e.ground);
      if (e.excited != a.excited || gb.F != F2 || std::abs(c2[e.q + 1]) < 1e-9 ||
          e.amplitude == 0.0)
        continue;
      shifts.push_back(zeeman_shift(gb, b, scheme) - zeeman_shift(ga, b, scheme));
    }
  }
  std::sort(shifts.begin(), shifts.end());
  std::vector<double> unique;
  for (double v : shifts)
    if (unique.empty() || v - unique.back() > 0.05) unique.push_back(v);
  return unique;
}

Outcome transverse_splitting() {
  const Scenario s = scenario("fig2d");
  const std::vector<double> shifts = raman_shifts(s);
  std::vector<double> expected;
  for (std::size_t i = 1; i < shifts.size(); ++i) expected.push_back(shifts[i] - shifts[i - 1]);

  const Timed t = run(s);
  const auto features = dip_metrics(t.result);
  const auto dips = only(features, FeatureKind::Dip);

  bool ok = dips.size() >= 2 && !expected.empty();
  std::string measured;
  for (std::size_t i = 1; i < dips.size(); ++i) {
    const double d = dips[i].position - dips[i - 1].position;
    measured += fmt(" %.2f", d);
    bool match = false;
    for (double e : expected) match |= std::abs(d - e) <= kSplittingTol * e;
    ok = ok && match;
  }
  std::string exp;
  for (double e : expected) exp += fmt(" %.2f", e);

  // Central inverted feature: absorption between the two innermost
  // components rising above the chord through the shoulders outside them.
  // Reported, not asserted.
  std::string inverted = "no central inverted feature";
  if (dips.size() >= 2 && !expected.empty()) {
    const auto& x = t.result.axis_values;
    const auto& y = t.result.absorption_laser1;
    const double mid = 0.5 * (dips.front().position + dips.back().position);
    std::size_t li = 0;
    for (std::size_t i = 1; i < dips.size(); ++i)
      if (dips[i].position < mid) li = i;
    const double a = dips[li].position, b = dips[li + 1].position, w = b - a;
    auto max_in = [&](double lo, double hi) {
      std::pair<double, double> best{0.0, -1e300};
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] >= lo && x[i] <= hi && y[i] > best.second) best = {x[i], y[i]};
      return best;
    };
    const auto c = max_in(a, b), l = max_in(a - w, a), r = max_in(b, b + w);
    const double chord = l.second + (r.second - l.second) * (c.first - l.first) /
                                        (r.first - l.first);
    if (c.second > chord)
      inverted = "central inverted feature at " + fmt("%.2f", c.first) + " MHz, " +
                 fmt("%.2e", (c.second - chord) / chord) + " above the shoulders";
  }

  return {ok, std::to_string(dips.size()) + " components " + positions(dips) +
                  ", spacings" + measured + " vs configured" + exp + " (+-" +
                  fmt("%.0f", 100 * kSplittingTol) + "%); " + inverted + "; scan " +
                  fmt("%.0f", t.seconds) + " s"};
}

Outcome oracle_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  ValidationOptions opt;
  const auto results = run_validation(opt);
  const double secs = since(t0);
  std::string failed;
  for (const auto& r : results)
    if (!r.passed) failed += " " + r.name;
  return {failed.empty() && secs < kValidateSeconds,
          std::to_string(results.size()) + " checks, " +
              (failed.empty() ? std::string("all passed") : "failed:" + failed) + ", " +
              fmt("%.1f", secs) + " s"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const Scenario s = scenario("fig2b");
  if (fig2b_run.result.size() == 0) fig2b_run = run(s);
  const SpectrumResult again = run(s).result;
  const std::string a = "acceptance_determinism_a.csv", b = "acceptance_determinism_b.csv";
  write_csv(a, fig2b_run.result, "0");
  write_csv(b, again, "0");
  const std::string ca = slurp(a), cb = slurp(b);
  return {!ca.empty() && ca == cb,
          "fig2b written twice: " + std::to_string(ca.size()) + " bytes, " +
              (ca == cb ? "identical" : "different")};
}

} // namespace

// Arguments select criteria by number; none runs all.
int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Doppler width at 300 K", doppler_width},
      {"fig2a peak structure and narrow dip", peak_structure},
      {"fig2b three dips at +-f", nscheme_dips},
      {"fig2c dip tracking slope", dip_tracking},
      {"longitudinal-field suppression", longitudinal_field},
      {"transverse-field splitting", transverse_splitting},
      {"oracle suite", oracle_suite},
      {"determinism", determinism},
  };
  int failures = 0;
  int k = 1;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  for (const auto& [name, body] : criteria) {
    if (!selected.empty() && !selected.count(k)) {
      ++k;
      continue;
    }
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d %s: %s | %s\n", k++, o.pass ? "PASS" : "FAIL", name,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
