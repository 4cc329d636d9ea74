#include <cmath>
#include <functional>

#include "ckn/mesh.hpp"
#include "ckn/quadrature.hpp"
#include "doctest.h"

using namespace ckn;

namespace {

double integrate(const QuadratureRule& rule,
                 const std::function<double(double, double)>& f) {
  double s = 0.0;
  for (const auto& pt : rule.points) s += pt.w * f(pt.x, pt.y);
  return s;
}

}  // namespace

TEST_CASE("weights are positive and sum to the triangle areas") {
  Mesh mesh = build_disk_mesh(1.0, 3, 2.0);
  QuadratureRule rule = QuadratureRule::build(mesh, 6);
  REQUIRE(static_cast<int>(rule.offset.size()) == mesh.n_triangles() + 1);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    double w = 0.0;
    for (const QuadPoint* p = rule.begin(t); p != rule.end(t); ++p) {
      CHECK(p->w > 0.0);
      w += p->w;
    }
    CHECK(w == doctest::Approx(mesh.signed_area(t)).epsilon(1e-12));
  }
}

TEST_CASE("barycentric coordinates reproduce the quadrature point") {
  Mesh mesh = build_disk_mesh(1.0, 2, 1.0);
  QuadratureRule rule = QuadratureRule::build(mesh, 4);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    for (const QuadPoint* p = rule.begin(t); p != rule.end(t); ++p) {
      const double x = p->b0 * mesh.vertices[tr[0]][0] + p->b1 * mesh.vertices[tr[1]][0] +
                       p->b2 * mesh.vertices[tr[2]][0];
      const double y = p->b0 * mesh.vertices[tr[0]][1] + p->b1 * mesh.vertices[tr[1]][1] +
                       p->b2 * mesh.vertices[tr[2]][1];
      CHECK(x == doctest::Approx(p->x).epsilon(1e-12));
      CHECK(y == doctest::Approx(p->y).epsilon(1e-12));
    }
  }
}

TEST_CASE("polynomials up to degree 4 integrate exactly away from the origin") {
  // single off-origin triangle: analytic moments over (1,0),(2,0),(1,1)
  Mesh mesh;
  mesh.vertices = {{1.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}};
  mesh.boundary = {1, 1, 1};
  mesh.triangles = {{0, 1, 2}};
  QuadratureRule rule = QuadratureRule::build(mesh, 1);
  CHECK(integrate(rule, [](double, double) { return 1.0; }) == doctest::Approx(0.5));
  // int x over the triangle = area * centroid_x = 0.5 * 4/3
  CHECK(integrate(rule, [](double x, double) { return x; }) ==
        doctest::Approx(0.5 * 4.0 / 3.0));
  // quartic: int x^2 y^2 = int_simplex (1+u)^2 v^2 = 1/12 + 2/60 + 1/180 = 11/90
  auto f = [](double x, double y) { return x * x * y * y; };
  CHECK(integrate(rule, f) == doctest::Approx(11.0 / 90.0).epsilon(1e-12));
}

TEST_CASE("origin triangles get composite layered points that avoid x = 0") {
  Mesh mesh = build_disk_mesh(1.0, 3, 2.0);
  QuadratureRule r4 = QuadratureRule::build(mesh, 4);
  QuadratureRule r8 = QuadratureRule::build(mesh, 8);
  int n4 = 0, n8 = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    bool origin_tri = false;
    for (int k : mesh.triangles[t]) origin_tri |= (k == mesh.origin_vertex());
    if (!origin_tri) {
      CHECK(r4.count(t) == 7);
      continue;
    }
    n4 += r4.count(t);
    n8 += r8.count(t);
    for (const QuadPoint* p = r4.begin(t); p != r4.end(t); ++p)
      CHECK(std::hypot(p->x, p->y) > 0.0);
  }
  CHECK(n8 > n4);  // deeper layering refines toward the origin
}

TEST_CASE("a singular weight integrates accurately on origin triangles") {
  // int_{disk} |x|^{-1/2} dx = 2 pi int_0^1 r^{1/2} dr = 4 pi / 3
  Mesh mesh = mesh_for_level(1.0, 4, 2.0);
  QuadratureRule rule = QuadratureRule::build(mesh, 8);
  const double got =
      integrate(rule, [](double x, double y) { return 1.0 / std::sqrt(std::hypot(x, y)); });
  CHECK(got == doctest::Approx(4.0 * std::acos(-1.0) / 3.0).epsilon(5e-3));
}
