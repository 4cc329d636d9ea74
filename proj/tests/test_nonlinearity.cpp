#include <cmath>

#include "ckn/nonlinearity.hpp"
#include "doctest.h"

using namespace ckn;

TEST_CASE("F is the primitive of f") {
  for (const Nonlinearity& nl : {Nonlinearity::pure_power(1.3, 4.0),
                                 Nonlinearity::power_plus_bounded(0.7, 3.0, 3.0, 1.0)}) {
    for (double s : {-2.0, -0.5, 0.3, 1.7}) {
      const double h = 1e-6;
      const double fd = (nl.F(s + h) - nl.F(s - h)) / (2.0 * h);
      CHECK(fd == doctest::Approx(nl.f(s)).epsilon(1e-5));
    }
  }
}

TEST_CASE("df is the derivative of f") {
  for (const Nonlinearity& nl : {Nonlinearity::pure_power(1.3, 4.0),
                                 Nonlinearity::power_plus_bounded(0.7, 3.0, 3.0, 1.0)}) {
    for (double s : {-2.0, -0.5, 0.3, 1.7}) {
      const double h = 1e-6;
      const double fd = (nl.f(s + h) - nl.f(s - h)) / (2.0 * h);
      CHECK(fd == doctest::Approx(nl.df(s)).epsilon(1e-5));
    }
  }
}

TEST_CASE("pure power is odd with f(0) = 0") {
  auto nl = Nonlinearity::pure_power(1.0, 4.0);
  CHECK(nl.f(0.0) == 0.0);
  CHECK(nl.f(-1.5) == doctest::Approx(-nl.f(1.5)));
  CHECK(nl.f(2.0) == doctest::Approx(8.0));
  CHECK(nl.F(2.0) == doctest::Approx(4.0));
}

TEST_CASE("default family passes (f1)-(f4)") {
  auto nl = Nonlinearity::pure_power(1.0, 4.0);
  auto rep = check_f_conditions(nl, 2.0, 1e300, 200, 42);
  CHECK(rep.all_pass());
}

TEST_CASE("kappa = 0 pinpoints (f3)") {
  auto nl = Nonlinearity::pure_power(0.0, 4.0);
  auto rep = check_f_conditions(nl, 2.0, 1e300, 200, 42);
  CHECK_FALSE(rep.all_pass());
  REQUIRE(rep.find("f3") != nullptr);
  CHECK_FALSE(rep.find("f3")->pass);
}

TEST_CASE("supercritical growth fails (f1)") {
  auto nl = Nonlinearity::pure_power(1.0, 4.0);
  auto rep = check_f_conditions(nl, 2.0, 3.5, 200, 42);  // p* below q
  REQUIRE(rep.find("f1") != nullptr);
  CHECK_FALSE(rep.find("f1")->pass);
}

TEST_CASE("bounded addition keeps the growth constants") {
  auto nl = Nonlinearity::power_plus_bounded(2.0, 3.0, 3.0, 1.0);
  CHECK(nl.growth_c1() == doctest::Approx(2.0));
  CHECK(nl.growth_c2() > 0.0);
  // |g| max = 3 sqrt(3)/16 at s^2 = 3
  CHECK(nl.growth_c2() == doctest::Approx(2.0 * 3.0 * std::sqrt(3.0) / 16.0));
}
