#include <cmath>
#include <random>

#include "ckn/assembly.hpp"
#include "ckn/mesh.hpp"
#include "ckn/rng.hpp"
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
  prm.lambda = 1.0;
  return prm;
}

ProblemParams paper_params() {
  ProblemParams prm;
  prm.mode = Mode::paper;
  prm.p = 1.5;
  prm.a = 0.2;
  prm.b = 0.2;
  prm.c = 0.5;
  prm.q = 3.0;
  prm.theta = 3.0;
  prm.lambda = 0.3;
  return prm;
}

FeFunction random_field(const Mesh& mesh, std::uint64_t seed) {
  auto rng = make_rng(seed, "test-fields");
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(mesh.n_vertices());
  for (int i = 0; i < v.size(); ++i) v[i] = nd(rng);
  return FeFunction(mesh, std::move(v));
}

}  // namespace

TEST_CASE("FeFunction construction enforces the Dirichlet boundary") {
  Mesh mesh = mesh_for_level(1.0, 2, 1.0);
  FeFunction u(mesh, Eigen::VectorXd::Ones(mesh.n_vertices()));
  for (int i = 0; i < mesh.n_vertices(); ++i)
    if (mesh.boundary[i]) CHECK(u.coeffs[i] == 0.0);
}

TEST_CASE("Phi and J are p-homogeneous to 1e-10 relative") {
  for (const auto& prm : {validation_params(), paper_params()}) {
    Mesh mesh = mesh_for_level(1.0, 2, 2.0);
    Assembler as(mesh, prm);
    FeFunction u = random_field(mesh, 11);
    FeFunction tu(mesh, 3.7 * u.coeffs);
    const double scale = std::pow(3.7, prm.p);
    CHECK(as.phi(tu) == doctest::Approx(scale * as.phi(u)).epsilon(1e-10));
    CHECK(as.j(tu) == doctest::Approx(scale * as.j(u)).epsilon(1e-10));
  }
}

TEST_CASE("Phi of a known linear-in-r^2 field matches the analytic value") {
  // validation mode, u = 1 - |x|^2 interpolated: Phi = int |Du|^2 ~ 2 pi
  Mesh mesh = mesh_for_level(1.0, 5, 1.0);
  ProblemParams prm = validation_params();
  Assembler as(mesh, prm);
  Eigen::VectorXd v(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const auto& x = mesh.vertices[i];
    v[i] = 1.0 - x[0] * x[0] - x[1] * x[1];
  }
  FeFunction u(mesh, std::move(v));
  CHECK(as.phi(u) == doctest::Approx(2.0 * std::acos(-1.0)).epsilon(2e-3));
}

TEST_CASE("gradients match central finite differences of the functionals") {
  for (const auto& prm : {validation_params(), paper_params()}) {
    Mesh mesh = mesh_for_level(1.0, 2, 2.0);
    Assembler as(mesh, prm);
    FeFunction u = random_field(mesh, 3);
    FeFunction d = random_field(mesh, 4);
    const double h = 1e-6;
    FeFunction up(mesh, u.coeffs + h * d.coeffs), um(mesh, u.coeffs - h * d.coeffs);
    CHECK(as.grad_phi(u).dot(d.coeffs) ==
          doctest::Approx((as.phi(up) - as.phi(um)) / (2 * h)).epsilon(1e-5));
    CHECK(as.grad_j(u).dot(d.coeffs) ==
          doctest::Approx((as.j(up) - as.j(um)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("residual matches central finite differences of I on 5 random fields") {
  ProblemParams prm = validation_params();
  prm.lambda = 1.5;
  Mesh mesh = mesh_for_level(1.0, 2, 1.0);
  Assembler as(mesh, prm);
  auto nl = Nonlinearity::pure_power(prm.kappa, prm.q);
  for (int k = 0; k < 5; ++k) {
    FeFunction u = random_field(mesh, 100 + k);
    FeFunction d = random_field(mesh, 200 + k);
    const double h = 1e-6;
    FeFunction up(mesh, u.coeffs + h * d.coeffs), um(mesh, u.coeffs - h * d.coeffs);
    const double fd = (as.energy(up, nl) - as.energy(um, nl)) / (2 * h);
    CHECK(as.residual(u, nl).dot(d.coeffs) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("hessian is the Jacobian of the residual") {
  for (const auto& prm : {validation_params(), paper_params()}) {
    Mesh mesh = mesh_for_level(1.0, 2, 2.0);
    Assembler as(mesh, prm);
    auto nl = Nonlinearity::pure_power(prm.kappa, prm.q);
    FeFunction u = random_field(mesh, 7);
    FeFunction d = random_field(mesh, 8);
    const double h = 1e-6;
    FeFunction up(mesh, u.coeffs + h * d.coeffs), um(mesh, u.coeffs - h * d.coeffs);
    Eigen::VectorXd fd = (as.residual(up, nl) - as.residual(um, nl)) / (2 * h);
    Eigen::VectorXd hd = as.hessian(u, nl) * d.coeffs;
    as.zero_boundary(hd);
    as.zero_boundary(fd);
    const double scale = std::max(1.0, fd.norm());
    CHECK((hd - fd).norm() / scale < 2e-4);
  }
}

TEST_CASE("dual norm is zero only at zero and scales the hat basis") {
  Mesh mesh = mesh_for_level(1.0, 2, 1.0);
  Assembler as(mesh, validation_params());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.n_vertices());
  CHECK(as.dual_norm(r).scaled_max == 0.0);
  r[mesh.origin_vertex()] = 2.0;
  CHECK(as.dual_norm(r).scaled_max > 0.0);
  CHECK(as.dual_norm(r).l2 == doctest::Approx(2.0));
}

TEST_CASE("preconditioner solves the weighted linear stiffness system") {
  Mesh mesh = mesh_for_level(1.0, 2, 2.0);
  Assembler as(mesh, paper_params());
  FeFunction rhs = random_field(mesh, 21);
  Eigen::VectorXd x = as.precond_solve(rhs.coeffs);
  Eigen::VectorXd back = as.stiffness() * x;
  as.zero_boundary(back);
  Eigen::VectorXd want = rhs.coeffs;
  as.zero_boundary(want);
  CHECK((back - want).norm() < 1e-9 * std::max(1.0, want.norm()));
}

TEST_CASE("weighted_lr reductions: ball restriction and gradient") {
  Mesh mesh = mesh_for_level(1.0, 3, 2.0);
  Assembler as(mesh, validation_params());
  FeFunction u = random_field(mesh, 31);
  const double full = as.weighted_lr(u, 2.0, 0.5);
  CHECK(as.weighted_lr_ball(u, 2.0, 0.5, 2.0) == doctest::Approx(full));
  CHECK(as.weighted_lr_ball(u, 2.0, 0.5, 0.25) < full);
  FeFunction d = random_field(mesh, 32);
  const double h = 1e-6;
  FeFunction up(mesh, u.coeffs + h * d.coeffs), um(mesh, u.coeffs - h * d.coeffs);
  const double fd = (as.weighted_lr(up, 2.0, 0.5) - as.weighted_lr(um, 2.0, 0.5)) / (2 * h);
  CHECK(as.grad_weighted_lr(u, 2.0, 0.5).dot(d.coeffs) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("scalar reductions are identical across thread counts") {
  Mesh mesh = mesh_for_level(1.0, 3, 1.0);
  ProblemParams prm = validation_params();
  AssemblyOptions o1, o4;
  o1.threads = 1;
  o4.threads = 4;
  Assembler a1(mesh, prm, o1), a4(mesh, prm, o4);
  FeFunction u = random_field(mesh, 51);
  CHECK(a1.phi(u) == a4.phi(u));
  CHECK(a1.j(u) == a4.j(u));
  CHECK(a1.nf(u, Nonlinearity::pure_power(1.0, 4.0)) ==
        a4.nf(u, Nonlinearity::pure_power(1.0, 4.0)));
}

TEST_CASE("field CSV round-trips at full precision") {
  Mesh mesh = mesh_for_level(1.0, 2, 1.0);
  FeFunction u = random_field(mesh, 61);
  const std::string path = "test_field_roundtrip.csv";
  write_field_csv(path, u);
  Eigen::VectorXd back = read_field_csv(path, mesh);
  CHECK((back - u.coeffs).norm() == 0.0);
  std::remove(path.c_str());
}
