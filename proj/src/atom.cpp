#include "eitnsim/atom.hpp"

#include "eitnsim/angular.hpp"
#include "eitnsim/error.hpp"
#include "eitnsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace eitnsim {
namespace {

// 87Rb D2: J = 1/2 -> J' = 3/2, I = 3/2 (all doubled).
constexpr int kTwoJg = 1;
constexpr int kTwoJe = 3;
constexpr int kTwoI = 3;
// |<J'||d||J>|^2 = 2J'+1 gives unit total decay strength per excited sublevel.
const double kReducedJ = std::sqrt(kTwoJe + 1.0);

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ConfigError(std::string(what) + " must be a positive finite number");
}

double reduced_hyperfine(int F_e, int F_g) {
  const int phase = (kTwoJe + kTwoI + 2 * F_g + 2) / 2;
  return kReducedJ * (phase % 2 ? -1.0 : 1.0) *
         std::sqrt((2.0 * F_e + 1.0) * (2.0 * F_g + 1.0)) *
         angular::wigner_6j(kTwoJe, 2 * F_e, kTwoI, 2 * F_g, kTwoJg, 2);
}

double dipole_element(int F_e, int m_e, int F_g, int m_g, int q) {
  if (m_e != m_g + q) return 0.0;
  const double three_j =
      angular::wigner_3j(2 * F_e, 2, 2 * F_g, -2 * m_e, 2 * q, 2 * m_g);
  const double sign = (std::abs(F_e - m_e) % 2) ? -1.0 : 1.0;
  return sign * three_j * reduced_hyperfine(F_e, F_g);
}

void check_branching(const LevelSchemeConfig& config) {
  for (const auto& b : {config.branching_e1, config.branching_e2}) {
    if (!(b[0] >= 0.0 && b[1] >= 0.0) || std::abs(b[0] + b[1] - 1.0) > 1e-12)
      throw ConfigError("ScalarN4 branching ratios must be non-negative and "
                        "sum to 1");
  }
}

} // namespace

std::string to_string(SchemeMode mode) {
  return mode == SchemeMode::ScalarN4 ? "ScalarN4" : "FullZeeman24";
}

SchemeMode scheme_mode_from_string(const std::string& name) {
  if (name == "ScalarN4") return SchemeMode::ScalarN4;
  if (name == "FullZeeman24") return SchemeMode::FullZeeman24;
  throw ConfigError("unknown scheme mode '" + name + "'");
}

LevelScheme build_level_scheme(const LevelSchemeConfig& config) {
  require_positive(config.gamma_MHz, "scheme.gamma_MHz");
  require_positive(config.intervals.ground_1_2, "scheme.intervals.ground_1_2");
  require_positive(config.intervals.excited_0_1, "scheme.intervals.excited_0_1");
  require_positive(config.intervals.excited_1_2, "scheme.intervals.excited_1_2");
  require_positive(config.intervals.excited_2_3, "scheme.intervals.excited_2_3");
  check_branching(config);

  LevelScheme scheme;
  scheme.config_ = config;

  const bool full = config.mode == SchemeMode::FullZeeman24;
  const std::vector<int> ground_F = {1, 2};
  const std::vector<int> excited_F =
      full ? std::vector<int>{0, 1, 2, 3} : std::vector<int>{1, 2};

  auto add = [&](Manifold m, int F) {
    const int lo = full ? -F : 0;
    const int hi = full ? F : 0;
    for (int mF = lo; mF <= hi; ++mF) {
      AtomicState s{m, F, mF, static_cast<int>(scheme.states_.size())};
      scheme.states_.push_back(s);
      scheme.energies_.push_back(scheme.level_energy(m, F));
    }
  };
  for (int F : ground_F) add(Manifold::Ground5S12, F);
  for (int F : excited_F) add(Manifold::Excited5P32, F);
  return scheme;
}

double LevelScheme::level_energy(Manifold m, int F) const {
  const auto& iv = config_.intervals;
  if (m == Manifold::Ground5S12) return F == 2 ? iv.ground_1_2 : 0.0;
  switch (F) {
  case 0: return -iv.excited_0_1;
  case 1: return 0.0;
  case 2: return iv.excited_1_2;
  case 3: return iv.excited_1_2 + iv.excited_2_3;
  default: throw std::out_of_range("no such excited hyperfine level");
  }
}

double LevelScheme::g_factor(Manifold m, int F) const {
  const auto& g = config_.g_factors;
  if (m == Manifold::Ground5S12) return F == 1 ? g.ground_F1 : g.ground_F2;
  switch (F) {
  case 1: return g.excited_F1;
  case 2: return g.excited_F2;
  case 3: return g.excited_F3;
  default: return 0.0;
  }
}

bool LevelScheme::has_level(Manifold m, int F) const {
  return std::any_of(states_.begin(), states_.end(), [&](const AtomicState& s) {
    return s.manifold == m && s.F == F;
  });
}

std::vector<int> LevelScheme::indices(Manifold m, int F) const {
  std::vector<int> out;
  for (const auto& s : states_)
    if (s.manifold == m && s.F == F) out.push_back(s.index);
  return out;
}

std::vector<int> LevelScheme::ground_indices() const {
  std::vector<int> out;
  for (const auto& s : states_)
    if (s.is_ground()) out.push_back(s.index);
  return out;
}

std::vector<int> LevelScheme::excited_indices() const {
  std::vector<int> out;
  for (const auto& s : states_)
    if (!s.is_ground()) out.push_back(s.index);
  return out;
}

std::vector<int> LevelScheme::levels(Manifold m) const {
  std::vector<int> out;
  for (const auto& s : states_)
    if (s.manifold == m && (out.empty() || out.back() != s.F)) out.push_back(s.F);
  return out;
}

int LevelScheme::index_of(Manifold m, int F, int mF) const {
  for (const auto& s : states_)
    if (s.manifold == m && s.F == F && s.mF == mF) return s.index;
  throw std::out_of_range("state not present in level scheme");
}

std::vector<DipoleCoupling> dipole_couplings(const LevelScheme& scheme) {
  std::vector<DipoleCoupling> out;
  const bool full = scheme.mode() == SchemeMode::FullZeeman24;
  for (int g : scheme.ground_indices()) {
    const auto& sg = scheme.state(g);
    for (int e : scheme.excited_indices()) {
      const auto& se = scheme.state(e);
      if (std::abs(se.F - sg.F) > 1) continue;
      if (!full) {
        out.push_back({g, e, 0, 1.0});
        continue;
      }
      const int q = se.mF - sg.mF;
      if (std::abs(q) > 1) continue;
      const double a = dipole_element(se.F, se.mF, sg.F, sg.mF, q);
      if (a != 0.0) out.push_back({g, e, q, a});
    }
  }
  return out;
}

double zeeman_shift(const AtomicState& state, double field_gauss,
                    const LevelScheme& scheme) {
  if (scheme.mode() != SchemeMode::FullZeeman24)
    throw UnsupportedModeError("zeeman_shift requires the FullZeeman24 scheme");
  return scheme.g_factor(state.manifold, state.F) * units::kBohrMagneton *
         field_gauss * state.mF;
}

std::vector<DecayChannel> decay_channels(const LevelScheme& scheme) {
  const int n = scheme.size();
  const double gamma = scheme.gamma();
  std::vector<DecayChannel> out;

  if (scheme.mode() == SchemeMode::ScalarN4) {
    check_branching(scheme.config());
    for (int Fe : {1, 2}) {
      const int e = scheme.index_of(Manifold::Excited5P32, Fe, 0);
      const auto& branching =
          Fe == 1 ? scheme.config().branching_e1 : scheme.config().branching_e2;
      for (int Fg : {1, 2}) {
        const double ratio = branching[Fg - 1];
        DecayChannel ch{0, Fg, Fe, Eigen::MatrixXd::Zero(n, n)};
        ch.op(scheme.index_of(Manifold::Ground5S12, Fg, 0), e) =
            std::sqrt(gamma * ratio);
        out.push_back(std::move(ch));
      }
    }
    return out;
  }

  const auto couplings = dipole_couplings(scheme);
  for (int q : {-1, 0, 1}) {
    for (int Fg : {1, 2}) {
      DecayChannel ch{q, Fg, -1, Eigen::MatrixXd::Zero(n, n)};
      for (const auto& c : couplings) {
        if (c.q != q || scheme.state(c.ground).F != Fg) continue;
        ch.op(c.ground, c.excited) = std::sqrt(gamma) * c.amplitude;
      }
      out.push_back(std::move(ch));
    }
  }
  return out;
}

} // namespace eitnsim
