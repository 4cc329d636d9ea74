#include <cmath>
#include <random>
#include <vector>

#include "ckn/config.hpp"
#include "ckn/eigensolve.hpp"
#include "ckn/errors.hpp"
#include "ckn/rng.hpp"
#include "ckn/verify.hpp"
#include "doctest.h"

using namespace ckn;

namespace {

ProblemParams validation_params() {
  ProblemParams prm;
  prm.mode = Mode::validation;
  prm.p = 2.0;
  prm.a = 0.0;
  prm.b = 0.0;
  prm.c = 2.0;
  prm.q = 4.0;
  prm.theta = 4.0;
  return prm;
}

FeFunction coordinate_field(const Mesh& mesh, int axis) {
  Eigen::VectorXd v(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) v[i] = mesh.vertices[i][axis];
  return FeFunction(mesh, std::move(v));
}

}  // namespace

TEST_CASE("sign components are counted on the vertex adjacency graph") {
  Mesh mesh = mesh_for_level(1.0, 3, 1.0);
  CHECK(count_sign_changes(FeFunction::zero(mesh)) == 0);

  Eigen::VectorXd one = Eigen::VectorXd::Ones(mesh.n_vertices());
  CHECK(count_sign_changes(FeFunction(mesh, std::move(one))) == 1);

  // u = x has one positive and one negative nodal domain
  CHECK(count_sign_changes(coordinate_field(mesh, 0)) == 2);

  // u = x * y has four quadrant domains
  Eigen::VectorXd v(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i)
    v[i] = mesh.vertices[i][0] * mesh.vertices[i][1];
  CHECK(count_sign_changes(FeFunction(mesh, std::move(v))) == 4);
}

TEST_CASE("solution report assembles the energy split consistently") {
  ProblemParams prm = validation_params();
  prm.lambda = 1.5;
  Mesh mesh = mesh_for_level(1.0, 3, 1.0);
  Assembler as(mesh, prm);
  auto nl = Nonlinearity::pure_power(1.0, 4.0);
  Eigen::VectorXd v(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const auto& x = mesh.vertices[i];
    v[i] = 1.0 - x[0] * x[0] - x[1] * x[1];
  }
  FeFunction u(mesh, std::move(v));
  SolutionReport rep = solution_report(as, u, nl);
  CHECK(rep.Phi == doctest::Approx(as.phi(u)));
  CHECK(rep.I == doctest::Approx(rep.Phi / 2.0 - 1.5 * rep.J / 2.0 - rep.NF));
  CHECK(rep.sign_changes == 1);
  CHECK(rep.max_abs == doctest::Approx(1.0));
  CHECK(std::hypot(rep.max_x, rep.max_y) == doctest::Approx(0.0));
}

TEST_CASE("the CKN estimate recovers the Poincare constant 1/lambda1") {
  RunConfig cfg;
  cfg.params = validation_params();
  cfg.levels = 3;
  cfg.tol = 1e-6;
  auto h = solve_lambda1_hierarchy(cfg);
  Assembler as(*h.meshes.back(), cfg.params);
  // r = p, alpha = (a+1)p - c reduces the weighted norm to J, so the best
  // constant is exactly 1/lambda1 on the same discrete space
  CknEstimate est = estimate_ckn_constant(as, 2.0, 0.0, 1e-8, 42);
  CHECK(est.c_est == doctest::Approx(1.0 / h.lambda1.back()).epsilon(1e-2));
  CHECK(est.iters > 0);
  REQUIRE(!est.history.empty());
  // the iteration history tracks the minimized Rayleigh value 1 / c
  CHECK(est.history.back() == doctest::Approx(1.0 / est.c_est));
}

TEST_CASE("the CKN estimate is monotone non-decreasing under refinement") {
  std::vector<double> c;
  for (int level = 1; level <= 3; ++level) {
    RunConfig cfg;
    cfg.params = validation_params();
    cfg.levels = level;
    Mesh mesh = mesh_for_level(1.0, level, cfg.effective_grading());
    Assembler as(mesh, cfg.params);
    c.push_back(estimate_ckn_constant(as, 2.0, 0.0, 1e-8, 42).c_est);
  }
  CHECK(c[1] >= c[0] - 1e-12);
  CHECK(c[2] >= c[1] - 1e-12);
}

TEST_CASE("the CKN estimate rejects malformed exponents") {
  Mesh mesh = mesh_for_level(1.0, 2, 1.0);
  Assembler as(mesh, validation_params());
  CHECK_THROWS_AS(estimate_ckn_constant(as, 0.5, 0.0, 1e-8, 42), std::invalid_argument);
  // alpha above the interpolation bound
  CHECK_THROWS_AS(estimate_ckn_constant(as, 2.0, 10.0, 1e-8, 42), GeometryError);
}

TEST_CASE("small-ball mass decay matches the predicted tail slope") {
  ProblemParams prm = validation_params();
  Mesh mesh = mesh_for_level(1.0, 4, 2.0);
  Assembler as(mesh, prm);
  auto rng = make_rng(5, "tail-samples");
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<FeFunction> samples;
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd v(mesh.n_vertices());
    for (int i = 0; i < v.size(); ++i) v[i] = nd(rng);
    FeFunction u(mesh, std::move(v));
    const double m = u.coeffs.cwiseAbs().maxCoeff();
    u.coeffs /= m;  // bounded family
    samples.push_back(std::move(u));
  }
  std::vector<double> deltas{0.4, 0.3, 0.2, 0.15, 0.1, 0.075, 0.05};
  TailFit fit = tail_exponent_check(as, samples, 2.0, 0.5, deltas);
  // predicted slope: n - (alpha - b r) q / (q - r) = 2 - 0.5*4/2 = 1
  CHECK(fit.predicted_slope == doctest::Approx(1.0));
  CHECK(fit.fitted_slope >= fit.predicted_slope - 0.1 * std::abs(fit.predicted_slope));
  CHECK(fit.deltas.size() == fit.masses.size());
}

TEST_CASE("tail check validates its inputs") {
  ProblemParams prm = validation_params();
  Mesh mesh = mesh_for_level(1.0, 2, 1.0);
  Assembler as(mesh, prm);
  std::vector<FeFunction> samples{FeFunction::zero(mesh)};
  std::vector<double> ok{0.4, 0.3, 0.2, 0.1};
  CHECK_THROWS_AS(tail_exponent_check(as, {}, 2.0, 0.5, ok), std::invalid_argument);
  CHECK_THROWS_AS(tail_exponent_check(as, samples, 2.0, 0.5, {0.4, 0.3}), std::invalid_argument);
  CHECK_THROWS_AS(tail_exponent_check(as, samples, 5.0, 0.5, ok), std::invalid_argument);
}
