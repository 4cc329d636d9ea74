#pragma once

#include <vector>

#include "ckn/mesh.hpp"

namespace ckn {

struct QuadPoint {
  double x, y;
  double w;              // absolute weight (sums to triangle area)
  double b0, b1, b2;     // barycentric coordinates w.r.t. the owning triangle
};

/// Per-triangle quadrature: a 7-point order-5 rule away from the origin and
/// a composite radially-subdivided 3-point rule on origin-adjacent triangles
/// so singular weights are never evaluated at x = 0.
struct QuadratureRule {
  std::vector<int> offset;      // size n_triangles+1
  std::vector<QuadPoint> points;

  const QuadPoint* begin(int t) const { return points.data() + offset[t]; }
  const QuadPoint* end(int t) const { return points.data() + offset[t + 1]; }
  int count(int t) const { return offset[t + 1] - offset[t]; }

  static QuadratureRule build(const Mesh& mesh, int origin_layers = 6);
};

}  // namespace ckn
