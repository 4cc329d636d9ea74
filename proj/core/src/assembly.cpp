#include "ckn/assembly.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ckn {

FeFunction::FeFunction(const Mesh& m, Eigen::VectorXd c) : mesh(&m), coeffs(std::move(c)) {
  if (coeffs.size() != m.n_vertices())
    throw std::invalid_argument("FeFunction: coefficient size mismatch");
  for (int i = 0; i < m.n_vertices(); ++i)
    if (m.boundary[i]) coeffs[i] = 0.0;
}

FeFunction FeFunction::zero(const Mesh& m) {
  return FeFunction(m, Eigen::VectorXd::Zero(m.n_vertices()));
}

Assembler::Assembler(const Mesh& mesh, const ProblemParams& params, AssemblyOptions opts)
    : mesh_(&mesh), params_(params), opts_(opts), rule_(QuadratureRule::build(mesh, opts.origin_layers)) {
  geom_.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    TriGeom& g = geom_[t];
    g.v[0] = tr[0];
    g.v[1] = tr[1];
    g.v[2] = tr[2];
    const auto& A = mesh.vertices[tr[0]];
    const auto& B = mesh.vertices[tr[1]];
    const auto& C = mesh.vertices[tr[2]];
    const double twoA = (B[0] - A[0]) * (C[1] - A[1]) - (B[1] - A[1]) * (C[0] - A[0]);
    g.area = 0.5 * twoA;
    g.gx[0] = (B[1] - C[1]) / twoA;
    g.gy[0] = (C[0] - B[0]) / twoA;
    g.gx[1] = (C[1] - A[1]) / twoA;
    g.gy[1] = (A[0] - C[0]) / twoA;
    g.gx[2] = (A[1] - B[1]) / twoA;
    g.gy[2] = (B[0] - A[0]) / twoA;
  }

  // ||phi_i|| = Phi(phi_i)^{1/p} used to scale the dual norm
  const double p = params_.p;
  const auto& ws = wsum(params_.a * p);
  hat_scale_ = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriGeom& g = geom_[t];
    for (int i = 0; i < 3; ++i) {
      const double gn = std::hypot(g.gx[i], g.gy[i]);
      hat_scale_[g.v[i]] += std::pow(gn, p) * ws[t];
    }
  }
  for (int i = 0; i < mesh.n_vertices(); ++i)
    hat_scale_[i] = mesh.boundary[i] ? 1.0 : std::pow(hat_scale_[i], 1.0 / p);
}

const std::vector<double>& Assembler::weight_table(double e) const {
  auto it = wtabs_.find(e);
  if (it != wtabs_.end()) return it->second;
  std::vector<double> tab(rule_.points.size());
  for (size_t q = 0; q < rule_.points.size(); ++q) {
    const auto& pt = rule_.points[q];
    const double r = std::hypot(pt.x, pt.y);
    tab[q] = e == 0.0 ? pt.w : pt.w * std::pow(r, -e);
  }
  return wtabs_.emplace(e, std::move(tab)).first->second;
}

const std::vector<double>& Assembler::wsum(double e) const {
  auto it = wsums_.find(e);
  if (it != wsums_.end()) return it->second;
  const auto& tab = weight_table(e);
  std::vector<double> sums(mesh_->n_triangles());
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    double s = 0.0;
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) s += tab[q];
    sums[t] = s;
  }
  return wsums_.emplace(e, std::move(sums)).first->second;
}

double Assembler::block_reduce(const std::function<double(int)>& per_tri) const {
  constexpr int kBlock = 1024;
  const int nt = mesh_->n_triangles();
  const int nblocks = (nt + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
  auto run_block = [&](int b) {
    double s = 0.0;
    const int hi = std::min(nt, (b + 1) * kBlock);
    for (int t = b * kBlock; t < hi; ++t) s += per_tri(t);
    partial[b] = s;
  };
  const int threads = std::max(1, opts_.threads);
  if (threads == 1 || nblocks == 1) {
    for (int b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(threads, nblocks); ++w)
      pool.emplace_back([&] {
        int b;
        while ((b = next.fetch_add(1)) < nblocks) run_block(b);
      });
    for (auto& th : pool) th.join();
  }
  // fixed combination order: bit-identical across thread counts
  double total = 0.0;
  for (int b = 0; b < nblocks; ++b) total += partial[b];
  return total;
}

double Assembler::phi(const FeFunction& u) const {
  const double p = params_.p;
  const auto& ws = wsum(params_.a * p);
  const double* c = u.coeffs.data();
  return block_reduce([&](int t) {
    const TriGeom& g = geom_[t];
    const double dx = c[g.v[0]] * g.gx[0] + c[g.v[1]] * g.gx[1] + c[g.v[2]] * g.gx[2];
    const double dy = c[g.v[0]] * g.gy[0] + c[g.v[1]] * g.gy[1] + c[g.v[2]] * g.gy[2];
    return std::pow(dx * dx + dy * dy, 0.5 * p) * ws[t];
  });
}

double Assembler::j(const FeFunction& u) const {
  const double p = params_.p;
  const auto& tab = weight_table((params_.a + 1.0) * p - params_.c);
  const double* c = u.coeffs.data();
  return block_reduce([&](int t) {
    const TriGeom& g = geom_[t];
    double s = 0.0;
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      s += tab[q] * std::pow(std::abs(uq), p);
    }
    return s;
  });
}

double Assembler::nf(const FeFunction& u, const Nonlinearity& nl) const {
  const auto& tab = weight_table(params_.b * params_.q);
  const double* c = u.coeffs.data();
  return block_reduce([&](int t) {
    const TriGeom& g = geom_[t];
    double s = 0.0;
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      s += tab[q] * nl.F(uq);
    }
    return s;
  });
}

double Assembler::energy(const FeFunction& u, const Nonlinearity& nl) const {
  const double p = params_.p;
  return phi(u) / p - params_.lambda * j(u) / p - nf(u, nl);
}

double Assembler::dnorm(const FeFunction& u) const { return std::pow(phi(u), 1.0 / params_.p); }

Eigen::VectorXd Assembler::grad_phi(const FeFunction& u) const {
  const double p = params_.p, eps = opts_.eps;
  const auto& ws = wsum(params_.a * p);
  const double* c = u.coeffs.data();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh_->n_vertices());
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const TriGeom& g = geom_[t];
    const double dx = c[g.v[0]] * g.gx[0] + c[g.v[1]] * g.gx[1] + c[g.v[2]] * g.gx[2];
    const double dy = c[g.v[0]] * g.gy[0] + c[g.v[1]] * g.gy[1] + c[g.v[2]] * g.gy[2];
    const double fac = p * std::pow(dx * dx + dy * dy + eps * eps, 0.5 * p - 1.0) * ws[t];
    for (int i = 0; i < 3; ++i) r[g.v[i]] += fac * (dx * g.gx[i] + dy * g.gy[i]);
  }
  zero_boundary(r);
  return r;
}

Eigen::VectorXd Assembler::grad_j(const FeFunction& u) const {
  const double p = params_.p;
  const auto& tab = weight_table((params_.a + 1.0) * p - params_.c);
  const double* c = u.coeffs.data();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh_->n_vertices());
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const TriGeom& g = geom_[t];
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      const double fac = uq == 0.0 ? 0.0 : p * tab[q] * std::pow(std::abs(uq), p - 2.0) * uq;
      r[g.v[0]] += fac * pt.b0;
      r[g.v[1]] += fac * pt.b1;
      r[g.v[2]] += fac * pt.b2;
    }
  }
  zero_boundary(r);
  return r;
}

Eigen::VectorXd Assembler::residual(const FeFunction& u, const Nonlinearity& nl) const {
  const double p = params_.p;
  Eigen::VectorXd r = grad_phi(u) / p - (params_.lambda / p) * grad_j(u);
  const auto& tab = weight_table(params_.b * params_.q);
  const double* c = u.coeffs.data();
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const TriGeom& g = geom_[t];
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      const double fq = tab[q] * nl.f(uq);
      r[g.v[0]] -= fq * pt.b0;
      r[g.v[1]] -= fq * pt.b1;
      r[g.v[2]] -= fq * pt.b2;
    }
  }
  zero_boundary(r);
  return r;
}

Eigen::SparseMatrix<double> Assembler::hessian(const FeFunction& u, const Nonlinearity& nl) const {
  const double p = params_.p, eps = opts_.eps, lambda = params_.lambda;
  const auto& ws = wsum(params_.a * p);
  const auto& jtab = weight_table((params_.a + 1.0) * p - params_.c);
  const auto& ftab = weight_table(params_.b * params_.q);
  const double* c = u.coeffs.data();
  const int n = mesh_->n_vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh_->n_triangles() * 9 + n);
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const TriGeom& g = geom_[t];
    const double dx = c[g.v[0]] * g.gx[0] + c[g.v[1]] * g.gx[1] + c[g.v[2]] * g.gx[2];
    const double dy = c[g.v[0]] * g.gy[0] + c[g.v[1]] * g.gy[1] + c[g.v[2]] * g.gy[2];
    const double gg = dx * dx + dy * dy + eps * eps;
    const double a1 = std::pow(gg, 0.5 * p - 1.0) * ws[t];
    const double a2 = (p - 2.0) * std::pow(gg, 0.5 * p - 2.0) * ws[t];
    double h[3][3];
    for (int i = 0; i < 3; ++i)
      for (int jl = 0; jl < 3; ++jl)
        h[i][jl] = a1 * (g.gx[i] * g.gx[jl] + g.gy[i] * g.gy[jl]) +
                   a2 * (dx * g.gx[i] + dy * g.gy[i]) * (dx * g.gx[jl] + dy * g.gy[jl]);
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      const double jq =
          uq == 0.0 ? 0.0 : lambda * (p - 1.0) * jtab[q] * std::pow(std::abs(uq), p - 2.0);
      const double fq = ftab[q] * nl.df(uq);
      const double bvals[3] = {pt.b0, pt.b1, pt.b2};
      for (int i = 0; i < 3; ++i)
        for (int jl = 0; jl < 3; ++jl) h[i][jl] -= (jq + fq) * bvals[i] * bvals[jl];
    }
    for (int i = 0; i < 3; ++i)
      for (int jl = 0; jl < 3; ++jl)
        if (!mesh_->boundary[g.v[i]] && !mesh_->boundary[g.v[jl]])
          trips.emplace_back(g.v[i], g.v[jl], h[i][jl]);
  }
  for (int i = 0; i < n; ++i)
    if (mesh_->boundary[i]) trips.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double> hess(n, n);
  hess.setFromTriplets(trips.begin(), trips.end());
  return hess;
}

DualNorm Assembler::dual_norm(const Eigen::VectorXd& r) const {
  double mx = 0.0;
  for (int i = 0; i < r.size(); ++i) mx = std::max(mx, std::abs(r[i]) / hat_scale_[i]);
  return {mx, r.norm()};
}

void Assembler::zero_boundary(Eigen::VectorXd& v) const {
  for (int i = 0; i < mesh_->n_vertices(); ++i)
    if (mesh_->boundary[i]) v[i] = 0.0;
}

void Assembler::ensure_linear_forms() const {
  if (stiff_ && mass_) return;
  const int n = mesh_->n_vertices();
  const auto& ws = wsum(params_.a * params_.p);
  const auto& mtab = weight_table((params_.a + 1.0) * params_.p - params_.c);
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(mesh_->n_triangles() * 9 + n);
  mt.reserve(mesh_->n_triangles() * 9);
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const TriGeom& g = geom_[t];
    for (int i = 0; i < 3; ++i)
      for (int jl = 0; jl < 3; ++jl) {
        const bool bi = mesh_->boundary[g.v[i]], bj = mesh_->boundary[g.v[jl]];
        if (!bi && !bj)
          kt.emplace_back(g.v[i], g.v[jl],
                          (g.gx[i] * g.gx[jl] + g.gy[i] * g.gy[jl]) * ws[t]);
        double mij = 0.0;
        for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
          const auto& pt = rule_.points[q];
          const double bvals[3] = {pt.b0, pt.b1, pt.b2};
          mij += mtab[q] * bvals[i] * bvals[jl];
        }
        mt.emplace_back(g.v[i], g.v[jl], mij);
      }
  }
  for (int i = 0; i < n; ++i)
    if (mesh_->boundary[i]) kt.emplace_back(i, i, 1.0);
  stiff_ = std::make_shared<Eigen::SparseMatrix<double>>(n, n);
  stiff_->setFromTriplets(kt.begin(), kt.end());
  mass_ = std::make_shared<Eigen::SparseMatrix<double>>(n, n);
  mass_->setFromTriplets(mt.begin(), mt.end());
}

const Eigen::SparseMatrix<double>& Assembler::stiffness() const {
  ensure_linear_forms();
  return *stiff_;
}

const Eigen::SparseMatrix<double>& Assembler::weighted_mass() const {
  ensure_linear_forms();
  return *mass_;
}

Eigen::VectorXd Assembler::precond_solve(const Eigen::VectorXd& r) const {
  ensure_linear_forms();
  if (!ldlt_) {
    ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt_->compute(*stiff_);
    if (ldlt_->info() != Eigen::Success)
      throw std::runtime_error("preconditioner factorization failed");
  }
  Eigen::VectorXd rhs = r;
  zero_boundary(rhs);
  Eigen::VectorXd x = ldlt_->solve(rhs);
  zero_boundary(x);
  return x;
}

double Assembler::weighted_lr(const FeFunction& u, double r_exp, double alpha_exp) const {
  const auto& tab = weight_table(alpha_exp);
  const double* c = u.coeffs.data();
  return block_reduce([&](int t) {
    const TriGeom& g = geom_[t];
    double s = 0.0;
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      s += tab[q] * std::pow(std::abs(uq), r_exp);
    }
    return s;
  });
}

Eigen::VectorXd Assembler::grad_weighted_lr(const FeFunction& u, double r_exp,
                                            double alpha_exp) const {
  const auto& tab = weight_table(alpha_exp);
  const double* c = u.coeffs.data();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh_->n_vertices());
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const TriGeom& g = geom_[t];
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      const double fac =
          uq == 0.0 ? 0.0 : r_exp * tab[q] * std::pow(std::abs(uq), r_exp - 2.0) * uq;
      r[g.v[0]] += fac * pt.b0;
      r[g.v[1]] += fac * pt.b1;
      r[g.v[2]] += fac * pt.b2;
    }
  }
  zero_boundary(r);
  return r;
}

double Assembler::weighted_lr_ball(const FeFunction& u, double r_exp, double alpha_exp,
                                   double delta) const {
  const auto& tab = weight_table(alpha_exp);
  const double* c = u.coeffs.data();
  return block_reduce([&](int t) {
    const TriGeom& g = geom_[t];
    double s = 0.0;
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      if (std::hypot(pt.x, pt.y) >= delta) continue;
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      s += tab[q] * std::pow(std::abs(uq), r_exp);
    }
    return s;
  });
}

double Assembler::j_sign_pairing(const FeFunction& u) const {
  const double p = params_.p;
  const auto& tab = weight_table((params_.a + 1.0) * p - params_.c);
  const double* c = u.coeffs.data();
  return block_reduce([&](int t) {
    const TriGeom& g = geom_[t];
    double s = 0.0;
    for (int q = rule_.offset[t]; q < rule_.offset[t + 1]; ++q) {
      const auto& pt = rule_.points[q];
      const double uq = c[g.v[0]] * pt.b0 + c[g.v[1]] * pt.b1 + c[g.v[2]] * pt.b2;
      if (uq != 0.0) s += tab[q] * std::pow(std::abs(uq), p - 2.0) * uq;
    }
    return s;
  });
}

double assemble_Phi(const FeFunction& u, const ProblemParams& params) {
  return Assembler(*u.mesh, params).phi(u);
}
double assemble_J(const FeFunction& u, const ProblemParams& params) {
  return Assembler(*u.mesh, params).j(u);
}
double assemble_NF(const FeFunction& u, const ProblemParams& params, const Nonlinearity& nl) {
  return Assembler(*u.mesh, params).nf(u, nl);
}
double energy_I(const FeFunction& u, const ProblemParams& params, const Nonlinearity& nl) {
  return Assembler(*u.mesh, params).energy(u, nl);
}

void write_field_csv(const std::string& path, const FeFunction& u) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.precision(17);
  f << "vertex_id,x,y,value\n";
  for (int i = 0; i < u.mesh->n_vertices(); ++i)
    f << i << "," << u.mesh->vertices[i][0] << "," << u.mesh->vertices[i][1] << ","
      << u.coeffs[i] << "\n";
}

Eigen::VectorXd read_field_csv(const std::string& path, const Mesh& mesh) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(f, line);  // header
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.n_vertices());
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    const int id = std::stoi(cell);
    std::getline(ls, cell, ',');
    std::getline(ls, cell, ',');
    std::getline(ls, cell, ',');
    if (id < 0 || id >= mesh.n_vertices()) throw std::runtime_error("field csv: bad vertex id");
    v[id] = std::stod(cell);
  }
  return v;
}

}  // namespace ckn
