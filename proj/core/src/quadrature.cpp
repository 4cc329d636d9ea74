#include "ckn/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace ckn {

namespace {

using Pt = std::array<double, 2>;

double tri_area(const Pt& a, const Pt& b, const Pt& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

// barycentric coordinates of p w.r.t. (a,b,c)
std::array<double, 3> barycentric(const Pt& p, const Pt& a, const Pt& b, const Pt& c) {
  const double det = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1]);
  const double l0 = ((b[1] - c[1]) * (p[0] - c[0]) + (c[0] - b[0]) * (p[1] - c[1])) / det;
  const double l1 = ((c[1] - a[1]) * (p[0] - c[0]) + (a[0] - c[0]) * (p[1] - c[1])) / det;
  return {l0, l1, 1.0 - l0 - l1};
}

// 7-point order-5 rule, barycentric (weights relative to area)
struct BaryPoint {
  double b0, b1, b2, w;
};
constexpr double kA = 0.059715871789770;
constexpr double kB = 0.470142064105115;
constexpr double kC = 0.797426985353087;
constexpr double kD = 0.101286507323456;
constexpr BaryPoint k7[] = {
    {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
    {kA, kB, kB, 0.132394152788506},
    {kB, kA, kB, 0.132394152788506},
    {kB, kB, kA, 0.132394152788506},
    {kC, kD, kD, 0.125939180544827},
    {kD, kC, kD, 0.125939180544827},
    {kD, kD, kC, 0.125939180544827},
};

// 3-point edge-midpoint rule (degree 2)
constexpr BaryPoint k3[] = {
    {0.5, 0.5, 0.0, 1.0 / 3},
    {0.0, 0.5, 0.5, 1.0 / 3},
    {0.5, 0.0, 0.5, 1.0 / 3},
};

}  // namespace

QuadratureRule QuadratureRule::build(const Mesh& mesh, int origin_layers) {
  if (origin_layers < 1) throw std::invalid_argument("quadrature: origin_layers >= 1");
  QuadratureRule rule;
  rule.offset.reserve(mesh.n_triangles() + 1);
  rule.offset.push_back(0);
  const int origin = mesh.origin_vertex();

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Pt A = mesh.vertices[tr[0]];
    const Pt B = mesh.vertices[tr[1]];
    const Pt C = mesh.vertices[tr[2]];

    int local_origin = -1;
    for (int i = 0; i < 3; ++i)
      if (tr[i] == origin) local_origin = i;

    auto emit_sub = [&](const Pt& a, const Pt& b, const Pt& c, const BaryPoint* bp, int np) {
      const double area = tri_area(a, b, c);
      for (int i = 0; i < np; ++i) {
        const Pt p{bp[i].b0 * a[0] + bp[i].b1 * b[0] + bp[i].b2 * c[0],
                   bp[i].b0 * a[1] + bp[i].b1 * b[1] + bp[i].b2 * c[1]};
        const auto l = barycentric(p, A, B, C);
        rule.points.push_back({p[0], p[1], bp[i].w * area, l[0], l[1], l[2]});
      }
    };

    if (local_origin < 0) {
      emit_sub(A, B, C, k7, 7);
    } else {
      // composite rule: geometric layers toward the origin vertex
      const Pt O = local_origin == 0 ? A : (local_origin == 1 ? B : C);
      const Pt P = local_origin == 0 ? B : (local_origin == 1 ? C : A);
      const Pt Q = local_origin == 0 ? C : (local_origin == 1 ? A : B);
      auto at = [&](double s, const Pt& v) {
        return Pt{O[0] + s * (v[0] - O[0]), O[1] + s * (v[1] - O[1])};
      };
      for (int k = 0; k < origin_layers; ++k) {
        const double so = std::ldexp(1.0, -k);       // outer scale
        const double si = std::ldexp(1.0, -(k + 1)); // inner scale
        const Pt c1 = at(si, P), c2 = at(si, Q), c3 = at(so, Q), c4 = at(so, P);
        emit_sub(c1, c3, c2, k3, 3);
        emit_sub(c1, c4, c3, k3, 3);
      }
      const double s = std::ldexp(1.0, -origin_layers);
      emit_sub(O, at(s, P), at(s, Q), k3, 3);
    }
    rule.offset.push_back(static_cast<int>(rule.points.size()));
  }
  return rule;
}

}  // namespace ckn
