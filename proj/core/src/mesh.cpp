#include "ckn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ckn {

namespace {
constexpr double kOriginTol = 1e-14;

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
             const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}
}  // namespace

double Mesh::signed_area(int t) const {
  const auto& tr = triangles[t];
  return 0.5 * cross(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < n_triangles(); ++t) s += signed_area(t);
  return s;
}

int Mesh::origin_vertex() const {
  for (int i = 0; i < n_vertices(); ++i)
    if (std::hypot(vertices[i][0], vertices[i][1]) < kOriginTol) return i;
  return -1;
}

std::vector<std::pair<std::array<int, 2>, int>> Mesh::edges() const {
  std::map<std::array<int, 2>, int> count;
  for (const auto& tr : triangles)
    for (int e = 0; e < 3; ++e) {
      int u = tr[e], v = tr[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      ++count[{u, v}];
    }
  return {count.begin(), count.end()};
}

Mesh build_disk_mesh(double radius, int level, double grading) {
  if (!(radius > 0.0)) throw std::invalid_argument("build_disk_mesh: radius must be positive");
  if (level < 1) throw std::invalid_argument("build_disk_mesh: level >= 1 required");
  if (!(grading >= 1.0)) throw std::invalid_argument("build_disk_mesh: grading >= 1 required");

  Mesh m;
  m.grading = grading;
  m.level = level;
  m.radius = radius;
  m.vertices.push_back({0.0, 0.0});
  m.boundary.push_back(0);

  std::vector<int> ring_start(level + 1, 0);  // ring 0 is the center vertex
  std::vector<int> ring_count(level + 1, 1);
  for (int k = 1; k <= level; ++k) {
    const double t = static_cast<double>(k) / level;
    const double r = radius * std::pow(t, grading);
    const int nk = 8 * k;
    ring_start[k] = m.n_vertices();
    ring_count[k] = nk;
    for (int j = 0; j < nk; ++j) {
      const double ang = 2.0 * std::numbers::pi * j / nk;
      m.vertices.push_back({r * std::cos(ang), r * std::sin(ang)});
      m.boundary.push_back(k == level ? 1 : 0);
    }
  }

  auto push_tri = [&m](int i, int j, int k) {
    std::array<int, 3> tr{i, j, k};
    if (0.5 * cross(m.vertices[i], m.vertices[j], m.vertices[k]) < 0.0) std::swap(tr[1], tr[2]);
    m.triangles.push_back(tr);
  };

  // center fan
  for (int j = 0; j < 8; ++j) push_tri(0, ring_start[1] + j, ring_start[1] + (j + 1) % 8);

  // merge-walk between consecutive rings (counts 8k and 8k+8, angles aligned at 0)
  for (int k = 1; k < level; ++k) {
    const int ni = ring_count[k], no = ring_count[k + 1];
    const int si = ring_start[k], so = ring_start[k + 1];
    auto ai = [ni](int i) { return 2.0 * std::numbers::pi * i / ni; };
    auto ao = [no](int j) { return 2.0 * std::numbers::pi * j / no; };
    int i = 0, j = 0;
    while (i < ni || j < no) {
      bool advance_outer;
      if (j >= no) advance_outer = false;
      else if (i >= ni) advance_outer = true;
      else advance_outer = ao(j + 1) <= ai(i + 1) + 1e-12;
      if (advance_outer) {
        push_tri(so + j % no, so + (j + 1) % no, si + i % ni);
        ++j;
      } else {
        push_tri(si + i % ni, so + j % no, si + (i + 1) % ni);
        ++i;
      }
    }
  }
  return m;
}

Refinement refine(const Mesh& mesh) {
  Refinement out;
  Mesh& fine = out.mesh;
  fine.grading = mesh.grading;
  fine.level = mesh.level + 1;
  fine.radius = mesh.radius;
  fine.project_to_circle = mesh.project_to_circle;
  fine.vertices = mesh.vertices;
  fine.boundary = mesh.boundary;
  out.n_coarse = mesh.n_vertices();

  // incident-triangle count per edge decides boundary status of midpoints
  std::map<std::array<int, 2>, int> edge_count;
  for (const auto& tr : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      int u = tr[e], v = tr[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      ++edge_count[{u, v}];
    }

  std::map<std::array<int, 2>, int> midpoint;
  auto mid = [&](int u, int v) {
    std::array<int, 2> key{std::min(u, v), std::max(u, v)};
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const auto& A = mesh.vertices[u];
    const auto& B = mesh.vertices[v];
    std::array<double, 2> P{0.5 * (A[0] + B[0]), 0.5 * (A[1] + B[1])};
    const bool on_boundary = edge_count[key] == 1;
    if (on_boundary && mesh.project_to_circle) {
      const double r = std::hypot(P[0], P[1]);
      if (r > 0.0) {
        P[0] *= mesh.radius / r;
        P[1] *= mesh.radius / r;
      }
    }
    const int idx = fine.n_vertices();
    fine.vertices.push_back(P);
    fine.boundary.push_back(on_boundary ? 1 : 0);
    out.edge_parents.push_back(key);
    midpoint[key] = idx;
    return idx;
  };

  for (const auto& tr : mesh.triangles) {
    const int v0 = tr[0], v1 = tr[1], v2 = tr[2];
    const int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
    fine.triangles.push_back({v0, m01, m02});
    fine.triangles.push_back({v1, m12, m01});
    fine.triangles.push_back({v2, m02, m12});
    fine.triangles.push_back({m01, m12, m02});
  }
  return out;
}

Eigen::VectorXd prolong(const Refinement& ref, const Eigen::VectorXd& coarse) {
  if (coarse.size() != ref.n_coarse)
    throw std::invalid_argument("prolong: coefficient size does not match coarse mesh");
  Eigen::VectorXd fine(ref.mesh.n_vertices());
  fine.head(ref.n_coarse) = coarse;
  for (size_t k = 0; k < ref.edge_parents.size(); ++k) {
    const auto& e = ref.edge_parents[k];
    fine[ref.n_coarse + static_cast<int>(k)] = 0.5 * (coarse[e[0]] + coarse[e[1]]);
  }
  // Dirichlet: prolonged values on the (possibly projected) boundary stay 0
  for (int i = 0; i < ref.mesh.n_vertices(); ++i)
    if (ref.mesh.boundary[i]) fine[i] = 0.0;
  return fine;
}

Mesh mesh_for_level(double radius, int level, double grading) {
  if (level < 1) throw std::invalid_argument("mesh_for_level: level >= 1 required");
  Mesh m = build_disk_mesh(radius, 3, grading);
  m.level = 1;
  for (int l = 1; l < level; ++l) m = refine(m).mesh;
  return m;
}

MeshStatistics mesh_statistics(const Mesh& mesh) {
  MeshStatistics st{0.0, std::numeric_limits<double>::max(), 180.0,
                    std::numeric_limits<double>::max()};
  for (const auto& [e, cnt] : mesh.edges()) {
    (void)cnt;
    const auto& A = mesh.vertices[e[0]];
    const auto& B = mesh.vertices[e[1]];
    const double h = std::hypot(A[0] - B[0], A[1] - B[1]);
    st.h_max = std::max(st.h_max, h);
    st.h_min = std::min(st.h_min, h);
  }
  for (const auto& tr : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const auto& O = mesh.vertices[tr[i]];
      const auto& A = mesh.vertices[tr[(i + 1) % 3]];
      const auto& B = mesh.vertices[tr[(i + 2) % 3]];
      const double ux = A[0] - O[0], uy = A[1] - O[1];
      const double vx = B[0] - O[0], vy = B[1] - O[1];
      const double ang = std::acos(std::clamp(
          (ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy)), -1.0, 1.0));
      st.min_angle_deg = std::min(st.min_angle_deg, ang * 180.0 / std::numbers::pi);
    }
  }
  for (const auto& v : mesh.vertices) {
    const double r = std::hypot(v[0], v[1]);
    if (r > kOriginTol) st.closest_vertex_distance = std::min(st.closest_vertex_distance, r);
  }
  return st;
}

void validate_mesh(const Mesh& mesh) {
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (!(mesh.signed_area(t) > 0.0))
      throw std::runtime_error("mesh: triangle " + std::to_string(t) + " has nonpositive area");
  const int ov = mesh.origin_vertex();
  if (ov < 0) throw std::runtime_error("mesh: origin is not a vertex");
  if (mesh.boundary[ov]) throw std::runtime_error("mesh: origin vertex flagged as boundary");
  for (const auto& [e, cnt] : mesh.edges()) {
    if (cnt != 1 && cnt != 2)
      throw std::runtime_error("mesh: edge shared by " + std::to_string(cnt) + " triangles");
    if (cnt == 1 && (!mesh.boundary[e[0]] || !mesh.boundary[e[1]]))
      throw std::runtime_error("mesh: boundary edge with interior endpoint");
  }
  if (mesh.boundary.size() != mesh.vertices.size())
    throw std::runtime_error("mesh: boundary flag count mismatch");
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os.precision(17);
  os << "POINTS " << mesh.n_vertices() << "\n";
  for (int i = 0; i < mesh.n_vertices(); ++i)
    os << mesh.vertices[i][0] << " " << mesh.vertices[i][1] << " " << int(mesh.boundary[i]) << "\n";
  os << "TRIANGLES " << mesh.n_triangles() << "\n";
  for (const auto& tr : mesh.triangles) os << tr[0] << " " << tr[1] << " " << tr[2] << "\n";
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_mesh(f, mesh);
}

Mesh read_mesh(std::istream& is) {
  Mesh m;
  std::string tag;
  int k = 0;
  if (!(is >> tag >> k) || tag != "POINTS") throw std::runtime_error("mesh file: expected POINTS");
  m.vertices.resize(k);
  m.boundary.resize(k);
  for (int i = 0; i < k; ++i) {
    int flag;
    if (!(is >> m.vertices[i][0] >> m.vertices[i][1] >> flag))
      throw std::runtime_error("mesh file: truncated POINTS");
    m.boundary[i] = static_cast<std::uint8_t>(flag);
  }
  int nt = 0;
  if (!(is >> tag >> nt) || tag != "TRIANGLES")
    throw std::runtime_error("mesh file: expected TRIANGLES");
  m.triangles.resize(nt);
  for (int t = 0; t < nt; ++t)
    if (!(is >> m.triangles[t][0] >> m.triangles[t][1] >> m.triangles[t][2]))
      throw std::runtime_error("mesh file: truncated TRIANGLES");
  double rmax = 0.0;
  for (const auto& v : m.vertices) rmax = std::max(rmax, std::hypot(v[0], v[1]));
  m.radius = rmax;
  return m;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_mesh(f);
}

}  // namespace ckn
