#include <stdexcept>

#include "ckn/params.hpp"
#include "doctest.h"

using namespace ckn;

TEST_CASE("critical exponent matches the closed form") {
  // p* = n p / (n - (1+a-b) p)
  CHECK(critical_exponent(1.5, 2.0, 0.2, 0.2) == doctest::Approx(2.0 * 1.5 / (2.0 - 1.5)));
  CHECK(critical_exponent(1.2, 3.0, 0.0, 0.5) ==
        doctest::Approx(3.0 * 1.2 / (3.0 - 0.5 * 1.2)));
}

TEST_CASE("critical exponent rejects out-of-range inputs") {
  CHECK_THROWS_AS(critical_exponent(1.0, 2.0, 0.0, 0.0), std::domain_error);   // p > 1
  CHECK_THROWS_AS(critical_exponent(2.0, 2.0, 0.0, 0.0), std::domain_error);   // p < n
  CHECK_THROWS_AS(critical_exponent(1.5, 2.0, 0.5, 0.2), std::domain_error);   // a <= b
  CHECK_THROWS_AS(critical_exponent(1.5, 2.0, 0.0, 1.5), std::domain_error);   // b <= a+1
}

TEST_CASE("d = 1 + a - b") {
  ProblemParams prm;
  prm.a = 0.25;
  prm.b = 0.75;
  CHECK(prm.d() == doctest::Approx(0.5));
}

TEST_CASE("paper-mode admissibility is strict") {
  ProblemParams prm;
  prm.mode = Mode::paper;
  prm.p = 1.5;
  prm.a = 0.2;
  prm.b = 0.2;
  prm.c = 0.5;
  prm.q = 3.0;
  prm.theta = 3.0;
  auto rep = validate_params(prm);
  CHECK(rep.ok());
  REQUIRE(rep.find("a<(n-p)/p") != nullptr);
  CHECK(rep.find("a<(n-p)/p")->severity == Severity::pass);

  prm.a = 0.5;  // (n-p)/p = 1/3, violated
  prm.b = 0.5;
  rep = validate_params(prm);
  CHECK_FALSE(rep.ok());
  CHECK(rep.find("a<(n-p)/p")->severity == Severity::fail);
}

TEST_CASE("validation mode downgrades paper-range violations to warnings") {
  ProblemParams prm;
  prm.mode = Mode::validation;
  prm.p = 2.0;  // p < n violated (p == n) but only a warning in validation mode
  prm.a = 0.0;
  prm.b = 0.0;
  prm.c = 2.0;
  prm.q = 4.0;
  prm.theta = 4.0;
  auto rep = validate_params(prm);
  CHECK(rep.ok());
  REQUIRE(rep.find("p<n") != nullptr);
  CHECK(rep.find("p<n")->severity == Severity::warn);

  // the three hard validation constraints still fail
  prm.q = 1.5;  // q > p violated
  rep = validate_params(prm);
  CHECK_FALSE(rep.ok());
}

TEST_CASE("findings report signed margins") {
  ProblemParams prm;
  prm.mode = Mode::validation;
  prm.p = 2.0;
  prm.q = 4.0;
  prm.theta = 4.0;
  auto rep = validate_params(prm);
  const Finding* f = rep.find("q>p");
  REQUIRE(f != nullptr);
  CHECK(f->margin == doctest::Approx(2.0));
}

TEST_CASE("validate_params is pure") {
  ProblemParams prm;
  prm.mode = Mode::validation;
  auto r1 = validate_params(prm);
  auto r2 = validate_params(prm);
  REQUIRE(r1.findings.size() == r2.findings.size());
  for (size_t i = 0; i < r1.findings.size(); ++i) {
    CHECK(r1.findings[i].name == r2.findings[i].name);
    CHECK(r1.findings[i].severity == r2.findings[i].severity);
    CHECK(r1.findings[i].margin == r2.findings[i].margin);
  }
}
