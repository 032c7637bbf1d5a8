#include "eitnsim/error.hpp"
#include "eitnsim/field.hpp"

#include "doctest.h"

#include <Eigen/Geometry>

#include <cmath>
#include <complex>

using namespace eitnsim;
using C = std::complex<double>;

TEST_CASE("linear polarization across the axis splits evenly into sigma+-") {
  const auto q = polarization_components({1, 0, 0}, {0, 0, 1});
  CHECK(std::norm(q[0]) == doctest::Approx(0.5));
  CHECK(std::abs(q[1]) < 1e-15);
  CHECK(std::norm(q[2]) == doctest::Approx(0.5));

  const auto pi = polarization_components({1, 0, 0}, {1, 0, 0});
  CHECK(std::norm(pi[1]) == doctest::Approx(1.0));
}

TEST_CASE("circular polarization is pure sigma+") {
  const double r = 1.0 / std::sqrt(2.0);
  const Eigen::Vector3cd plus(-r, C(0, -r), 0);
  const auto q = polarization_components(plus, {0, 0, 1});
  CHECK(std::norm(q[2]) == doctest::Approx(1.0));
  CHECK(std::abs(q[0]) < 1e-15);
  CHECK(std::abs(q[1]) < 1e-15);
}

TEST_CASE("spherical weights are invariant under a common rotation") {
  const Eigen::Vector3cd p = Eigen::Vector3cd(C(0.3, 0.1), C(-0.5, 0.4), C(0.2, -0.6)).normalized();
  const Eigen::Vector3d axis(0.2, -0.7, 0.4);
  const Eigen::Matrix3d R =
      Eigen::AngleAxisd(1.1, Eigen::Vector3d(1, 2, -0.5).normalized()).toRotationMatrix();
  const auto a = polarization_components(p, axis);
  const auto b = polarization_components(R.cast<C>() * p, R * axis);
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(a[k]) == doctest::Approx(std::abs(b[k])).epsilon(1e-12));
    total += std::norm(a[k]);
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("quantization frame is right-handed and orthonormal") {
  for (const Eigen::Vector3d axis :
       {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, -2), Eigen::Vector3d(1, 1, 0)}) {
    const Eigen::Matrix3d F = quantization_frame(axis);
    CHECK((F.transpose() * F - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(F.determinant() == doctest::Approx(1.0));
    CHECK((F.col(2) - axis.normalized()).norm() < 1e-12);
  }
  CHECK_THROWS_AS(quantization_frame(Eigen::Vector3d::Zero()), ValidationError);
}

TEST_CASE("field construction validates its inputs") {
  CHECK_THROWS_AS(make_field(Laser::Laser1, 0, 1, {1, 1, 0}, 0), ValidationError);
  CHECK_THROWS_AS(make_field(Laser::Laser1, 0, -1, {1, 0, 0}, 0), ValidationError);
  CHECK_THROWS_AS(make_field(Laser::Laser1, std::nan(""), 1, {1, 0, 0}, 0),
                  ValidationError);
  const LaserField f = make_field(Laser::Laser2, 5, 3, {0, 1, 0}, 1);
  CHECK(f.components.size() == 1);
  CHECK(f.target_ground_F == 1);
  CHECK_FALSE(f.modulated());
}

TEST_CASE("modulation adds symmetric first-order sidebands") {
  const LaserField f = apply_modulation(make_field(Laser::Laser1, 0, 20, {1, 0, 0}, 1), 156.9, 0.1);
  REQUIRE(f.components.size() == 3);
  CHECK(f.components[1].order == -1);
  CHECK(f.components[1].offset_MHz == doctest::Approx(-156.9));
  CHECK(f.components[2].offset_MHz == doctest::Approx(156.9));
  CHECK(f.components[2].amplitude_rel * f.components[2].amplitude_rel == doctest::Approx(0.1));
  CHECK_THROWS_AS(apply_modulation(f, 100, 0.1), ValidationError);
  CHECK_THROWS_AS(apply_modulation(make_field(Laser::Laser1, 0, 1, {1, 0, 0}, 0), 100, 1.5),
                  ValidationError);
}

TEST_CASE("Rabi frequency scales with the square root of intensity") {
  // I = 2 I_sat gives Omega = Gamma.
  CHECK(rabi_from_intensity(2 * 1.67, 1.67, 6.0) == doctest::Approx(6.0));
  CHECK(rabi_from_intensity(8 * 1.67, 1.67, 6.0) == doctest::Approx(12.0));
  CHECK_THROWS_AS(rabi_from_intensity(1, 0, 6), ConfigError);
}
