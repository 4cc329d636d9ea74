#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ckn {

/// Conforming triangulation of a planar domain with the origin as an
/// interior vertex, graded toward the origin to resolve singular weights.
struct Mesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;  // positively oriented
  std::vector<std::uint8_t> boundary;         // per-vertex flag
  double grading = 1.0;
  int level = 1;
  double radius = 1.0;
  bool project_to_circle = true;  // boundary midpoints snap to the circle on refine

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  double total_area() const;
  /// Index of the vertex at the origin, -1 if absent.
  int origin_vertex() const;
  /// Sorted (v0<v1) edge list with incident-triangle counts.
  std::vector<std::pair<std::array<int, 2>, int>> edges() const;
};

struct MeshStatistics {
  double h_max;
  double h_min;
  double min_angle_deg;
  double closest_vertex_distance;  // nearest non-origin vertex to the origin
};

/// Disk mesh: center vertex plus `level` rings of 8k vertices, ring k at
/// radius R*(k/level)^grading. Deterministic for fixed inputs.
Mesh build_disk_mesh(double radius, int level, double grading);

/// Uniform 4-way refinement. Parent vertices keep index and coordinates;
/// new boundary midpoints are projected onto the circle.
struct Refinement {
  Mesh mesh;
  int n_coarse = 0;
  /// Parent edge endpoints for each new vertex (index >= n_coarse).
  std::vector<std::array<int, 2>> edge_parents;
};
Refinement refine(const Mesh& mesh);

/// Piecewise-linear prolongation of a coefficient vector onto the refined
/// mesh; exact at all parent vertices.
Eigen::VectorXd prolong(const Refinement& ref, const Eigen::VectorXd& coarse);

/// Mesh used by the solvers at a given refinement level: a 3-ring graded
/// base refined level-1 times, so spaces at successive levels are nested.
Mesh mesh_for_level(double radius, int level, double grading);

MeshStatistics mesh_statistics(const Mesh& mesh);

/// Throws std::runtime_error on any violated mesh invariant.
void validate_mesh(const Mesh& mesh);

/// Text format: `POINTS k`, k lines `x y flag`, `TRIANGLES m`, m lines `i j k`.
void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

}  // namespace ckn
