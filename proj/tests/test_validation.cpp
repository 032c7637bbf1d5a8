#include "eitnsim/error.hpp"
#include "eitnsim/validation.hpp"

#include "doctest.h"

using namespace eitnsim;

TEST_CASE("quick validation passes") {
  const auto results = run_validation({});
  CHECK(results.size() >= 7);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.value);
    CHECK(r.passed);
  }
}

TEST_CASE("full validation adds the Zeeman checks and passes") {
  ValidationOptions opt;
  opt.level = ValidationLevel::Full;
  const auto results = run_validation(opt);
  CHECK(results.size() > run_validation({}).size());
  for (const auto& r : results) {
    CAPTURE(r.name);
    CHECK(r.passed);
  }
}

TEST_CASE("a corrupted decay rate is caught") {
  ValidationOptions opt;
  opt.fault = "gamma";
  bool any_failed = false;
  for (const auto& r : run_validation(opt))
    if (!r.passed) any_failed = true;
  CHECK(any_failed);
  opt.fault = "nonsense";
  CHECK_THROWS_AS(run_validation(opt), ConfigError);
}

TEST_CASE("rotating B and both polarizations leaves absorption unchanged") {
  CHECK(covariance_error(5) < 1e-8);
}
