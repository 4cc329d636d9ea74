#include <cmath>

#include "ckn/config.hpp"
#include "ckn/eigensolve.hpp"
#include "ckn/errors.hpp"
#include "doctest.h"

using namespace ckn;

namespace {

RunConfig validation_config(int levels) {
  RunConfig cfg;
  cfg.params.mode = Mode::validation;
  cfg.params.p = 2.0;
  cfg.params.a = 0.0;
  cfg.params.b = 0.0;
  cfg.params.c = 2.0;
  cfg.params.q = 4.0;
  cfg.params.theta = 4.0;
  cfg.levels = levels;
  cfg.tol = 1e-6;
  return cfg;
}

}  // namespace

TEST_CASE("normalization onto the constraint manifold is idempotent") {
  Mesh mesh = mesh_for_level(1.0, 2, 1.0);
  Assembler as(mesh, validation_config(2).params);
  Eigen::VectorXd v(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const auto& x = mesh.vertices[i];
    v[i] = 1.0 - x[0] * x[0] - x[1] * x[1];
  }
  FeFunction u(mesh, std::move(v));
  FeFunction n1 = normalize_to_M(as, u);
  CHECK(as.j(n1) == doctest::Approx(1.0).epsilon(1e-12));
  FeFunction n2 = normalize_to_M(as, n1);
  CHECK((n2.coeffs - n1.coeffs).norm() < 1e-12 * n1.coeffs.norm());
  CHECK_THROWS_AS(normalize_to_M(as, FeFunction::zero(mesh)), GeometryError);
}

TEST_CASE("odd loop applies the antipodal identification") {
  Mesh mesh = mesh_for_level(1.0, 1, 1.0);
  OddLoop loop;
  for (int k = 0; k < 4; ++k)
    loop.beads.push_back(FeFunction(mesh, Eigen::VectorXd::Constant(mesh.n_vertices(), k + 1.0)));
  CHECK(loop.half() == 4);
  CHECK(loop.bead(1).coeffs[0] == doctest::Approx(2.0));
  CHECK(loop.bead(5).coeffs[0] == doctest::Approx(-2.0));   // antipode of bead 1
  CHECK(loop.bead(8).coeffs[0] == doctest::Approx(1.0));    // wraps around
}

TEST_CASE("lambda1 approaches the Bessel oracle from above") {
  RunConfig cfg = validation_config(3);
  auto h = solve_lambda1_hierarchy(cfg);
  REQUIRE(h.lambda1.size() == 3);
  const double bessel = 5.78319;
  for (double v : h.lambda1) CHECK(v > bessel);
  CHECK(h.lambda1[2] < h.lambda1[1]);
  CHECK(h.lambda1[1] < h.lambda1[0]);
  CHECK(h.lambda1[2] == doctest::Approx(bessel).epsilon(5e-3));
  CHECK(h.pair.residual_norm < 1e-5);
}

TEST_CASE("e1 is interior-positive after sign normalization") {
  RunConfig cfg = validation_config(3);
  auto h = solve_lambda1_hierarchy(cfg);
  const Mesh& mesh = *h.meshes.back();
  for (int i = 0; i < mesh.n_vertices(); ++i)
    if (!mesh.boundary[i]) CHECK(h.pair.func.coeffs[i] > 0.0);
}

TEST_CASE("mu2 exceeds lambda1 and e2 changes sign") {
  RunConfig cfg = validation_config(3);
  auto sp = solve_spectrum_hierarchy(cfg);
  CHECK(sp.mu2.pair.value > sp.lambda1.back());
  CHECK(sp.mu2.pair.value == doctest::Approx(14.68197).epsilon(2e-2));
  bool pos = false, neg = false;
  for (int i = 0; i < sp.pair1.func.coeffs.size(); ++i) {
    if (sp.mu2.pair.func.coeffs[i] > 1e-8) pos = true;
    if (sp.mu2.pair.func.coeffs[i] < -1e-8) neg = true;
  }
  CHECK(pos);
  CHECK(neg);
}

TEST_CASE("the linear cross-check agrees with the nonlinear solvers at p = 2") {
  RunConfig cfg = validation_config(3);
  auto sp = solve_spectrum_hierarchy(cfg);
  LinearPair lin = linear_cross_check(*sp.assembler);
  CHECK(std::abs(lin.lambda1 - sp.lambda1.back()) / lin.lambda1 < 1e-3);
  CHECK(std::abs(lin.lambda2 - sp.mu2.pair.value) / lin.lambda2 < 1e-2);
}

TEST_CASE("the linear cross-check rejects p != 2") {
  RunConfig cfg = validation_config(2);
  cfg.params.p = 1.5;
  cfg.params.c = 0.5;
  cfg.params.q = 3.0;
  cfg.params.theta = 3.0;
  Mesh mesh = mesh_for_level(cfg.radius, cfg.levels, cfg.effective_grading());
  Assembler as(mesh, cfg.params);
  CHECK_THROWS(linear_cross_check(as));
}

TEST_CASE("identical seeds give identical eigenpairs") {
  RunConfig cfg = validation_config(2);
  auto h1 = solve_lambda1_hierarchy(cfg);
  auto h2 = solve_lambda1_hierarchy(cfg);
  CHECK(h1.pair.value == h2.pair.value);
  CHECK((h1.pair.func.coeffs - h2.pair.func.coeffs).norm() == 0.0);
}
