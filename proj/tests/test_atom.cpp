#include "eitnsim/angular.hpp"
#include "eitnsim/atom.hpp"
#include "eitnsim/error.hpp"

#include "doctest.h"

#include <cmath>
#include <map>

using namespace eitnsim;
using namespace eitnsim::angular;

namespace {

LevelScheme zeeman() {
  LevelSchemeConfig c;
  c.mode = SchemeMode::FullZeeman24;
  return build_level_scheme(c);
}

} // namespace

TEST_CASE("3j and 6j symbols match tabulated values") {
  CHECK(wigner_3j(2, 2, 0, 0, 0, 0) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(wigner_3j(2, 2, 2, 2, -2, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
  CHECK(wigner_3j(3, 3, 0, 1, -1, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(wigner_3j(2, 2, 2, 0, 0, 0) == 0.0); // odd sum with all m = 0
  CHECK(wigner_3j(2, 2, 6, 0, 0, 0) == 0.0); // triangle violated
  CHECK(wigner_6j(2, 2, 2, 2, 2, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(wigner_6j(4, 4, 4, 4, 4, 4) == doctest::Approx(-3.0 / 70.0).epsilon(1e-14));
}

TEST_CASE("Clebsch-Gordan coefficients are orthonormal") {
  // sum_{m1,m2} <j1 m1 j2 m2|J M><j1 m1 j2 m2|J' M'> = delta
  const int two_j1 = 3, two_j2 = 2; // 3/2 x 1
  for (int J : {1, 3, 5})
    for (int Jp : {1, 3, 5})
      for (int M = -J; M <= J; M += 2) {
        double s = 0.0;
        for (int m1 = -two_j1; m1 <= two_j1; m1 += 2)
          for (int m2 = -two_j2; m2 <= two_j2; m2 += 2)
            s += clebsch_gordan(two_j1, m1, two_j2, m2, J, M) *
                 clebsch_gordan(two_j1, m1, two_j2, m2, Jp, M);
        CHECK(s == doctest::Approx(J == Jp ? 1.0 : 0.0).epsilon(1e-13));
      }
  CHECK(clebsch_gordan(2, 2, 2, -2, 0, 0) == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("CG lowering recursion") {
  // J_- on |J M>: sqrt((J+M)(J-M+1)) <m1 m2|J M-1> =
  //   sqrt((j1-m1)(j1+m1+1)) <m1+1 m2|J M> + sqrt((j2-m2)(j2+m2+1)) <m1 m2+1|J M>
  const int j1 = 4, j2 = 2; // doubled
  for (int J = 2; J <= 6; J += 2)
    for (int M = -J + 2; M <= J; M += 2)
      for (int m1 = -j1; m1 <= j1; m1 += 2) {
        const int m2 = M - 2 - m1;
        if (std::abs(m2) > j2) continue;
        auto f = [](int j, int m) { return std::sqrt(0.25 * (j - m) * (j + m + 2)); };
        const double lhs = std::sqrt(0.25 * (J + M) * (J - M + 2)) *
                           clebsch_gordan(j1, m1, j2, m2, J, M - 2);
        double rhs = 0.0;
        if (m1 + 2 <= j1) rhs += f(j1, m1) * clebsch_gordan(j1, m1 + 2, j2, m2, J, M);
        if (m2 + 2 <= j2) rhs += f(j2, m2) * clebsch_gordan(j1, m1, j2, m2 + 2, J, M);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
}

TEST_CASE("level schemes have the expected states") {
  CHECK(zeeman().size() == 24);
  LevelSchemeConfig c;
  const LevelScheme s = build_level_scheme(c);
  CHECK(s.size() == 4);
  CHECK(s.ground_indices().size() == 2);
  CHECK(s.level_energy(Manifold::Excited5P32, 2) - s.level_energy(Manifold::Excited5P32, 1) ==
        doctest::Approx(156.9));
  CHECK_FALSE(s.has_level(Manifold::Excited5P32, 0));
}

TEST_CASE("dipole line strengths obey the sum rule and known branching") {
  const LevelScheme s = zeeman();
  std::map<int, double> total;
  std::map<std::pair<int, int>, double> branch; // (F', F) -> sum over sublevels
  for (const auto& c : dipole_couplings(s)) {
    total[c.excited] += c.amplitude * c.amplitude;
    branch[{s.state(c.excited).F, s.state(c.ground).F}] += c.amplitude * c.amplitude;
    if (s.state(c.ground).F == 2 && s.state(c.ground).mF == 2 &&
        s.state(c.excited).F == 3 && s.state(c.excited).mF == 3)
      CHECK(std::abs(c.amplitude) == doctest::Approx(1.0));
  }
  for (int e : s.excited_indices()) CHECK(total[e] == doctest::Approx(1.0).epsilon(1e-13));
  // Per excited sublevel: F'=1 -> F=1 5/6, F=2 1/6; F'=2 -> 1/2, 1/2.
  CHECK(branch[{1, 1}] / 3.0 == doctest::Approx(5.0 / 6.0));
  CHECK(branch[{1, 2}] / 3.0 == doctest::Approx(1.0 / 6.0));
  CHECK(branch[{2, 1}] / 5.0 == doctest::Approx(0.5));
  CHECK(branch[{3, 1}] == 0.0);
  CHECK(branch[{0, 2}] == 0.0);
}

TEST_CASE("decay channels are complete") {
  for (SchemeMode mode : {SchemeMode::ScalarN4, SchemeMode::FullZeeman24}) {
    LevelSchemeConfig c;
    c.mode = mode;
    const LevelScheme s = build_level_scheme(c);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(s.size(), s.size());
    for (const auto& ch : decay_channels(s)) sum += ch.op.transpose() * ch.op;
    for (int i = 0; i < s.size(); ++i)
      CHECK(sum(i, i) == doctest::Approx(s.state(i).is_ground() ? 0.0 : 6.0));
    CHECK((sum - Eigen::MatrixXd(sum.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("Zeeman shift is linear in gF mF B") {
  const LevelScheme s = zeeman();
  const int i = s.index_of(Manifold::Ground5S12, 2, 2);
  CHECK(zeeman_shift(s.state(i), 1.0, s) == doctest::Approx(0.5 * 2 * 1.3996));
  CHECK(zeeman_shift(s.state(i), 3.0, s) == doctest::Approx(3 * zeeman_shift(s.state(i), 1.0, s)));
  const int j = s.index_of(Manifold::Ground5S12, 1, 1);
  CHECK(zeeman_shift(s.state(j), 1.0, s) == doctest::Approx(-0.5 * 1.3996));

  LevelSchemeConfig c;
  const LevelScheme scalar = build_level_scheme(c);
  CHECK_THROWS_AS(zeeman_shift(scalar.state(0), 1.0, scalar), UnsupportedModeError);
}

TEST_CASE("ScalarN4 branching must sum to one") {
  LevelSchemeConfig c;
  c.branching_e1 = {0.7, 0.7};
  CHECK_THROWS(decay_channels(build_level_scheme(c)));
}
