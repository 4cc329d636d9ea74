#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ckn/mesh.hpp"
#include "ckn/nonlinearity.hpp"
#include "ckn/params.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

/// Coefficient vector of a piecewise-linear field vanishing on the boundary.
/// Construction zeroes every boundary-flagged entry.
struct FeFunction {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd coeffs;

  FeFunction() = default;
  FeFunction(const Mesh& m, Eigen::VectorXd c);
  static FeFunction zero(const Mesh& m);
};

struct DualNorm {
  double scaled_max;  // max_i |r_i| / ||phi_i||
  double l2;
};

struct AssemblyOptions {
  double eps = 1e-8;     // regularization of |Du|^{p-2} for p != 2
  int origin_layers = 6; // composite quadrature depth on origin triangles
  int threads = 1;
};

/// Evaluates the weighted functionals Phi, J, N_F, the energy I and their
/// gradients over the FE space. Weight values |x_q|^{-e} are cached per
/// exponent; scalar reductions run over fixed triangle blocks combined in
/// block order, so results are bit-identical across thread counts.
class Assembler {
 public:
  Assembler(const Mesh& mesh, const ProblemParams& params, AssemblyOptions opts = {});

  const Mesh& mesh() const { return *mesh_; }
  const ProblemParams& params() const { return params_; }
  const QuadratureRule& rule() const { return rule_; }

  double phi(const FeFunction& u) const;      // int |x|^{-ap} |Du|^p
  double j(const FeFunction& u) const;        // int |x|^{-(a+1)p+c} |u|^p
  double nf(const FeFunction& u, const Nonlinearity& nl) const;  // int |x|^{-bq} F(u)
  double energy(const FeFunction& u, const Nonlinearity& nl) const;  // I(u)
  /// ||u|| = Phi(u)^{1/p}, the discrete D_a^{1,p} norm.
  double dnorm(const FeFunction& u) const;

  /// Frechet derivatives as coefficient vectors (boundary entries zero).
  Eigen::VectorXd grad_phi(const FeFunction& u) const;  // <Phi'(u), phi_i>
  Eigen::VectorXd grad_j(const FeFunction& u) const;    // <J'(u), phi_i>
  /// Weak residual of I: <I'(u), phi_i>.
  Eigen::VectorXd residual(const FeFunction& u, const Nonlinearity& nl) const;

  /// Jacobian of the residual, i.e. the weak Hessian of I at u with the same
  /// |Du|^{p-2} regularization as grad_phi. Boundary rows/cols are identity.
  Eigen::SparseMatrix<double> hessian(const FeFunction& u, const Nonlinearity& nl) const;

  DualNorm dual_norm(const Eigen::VectorXd& r) const;

  /// Solve with the weighted linear stiffness preconditioner (boundary rows
  /// pinned); used as a Sobolev-gradient metric by the iterative solvers.
  Eigen::VectorXd precond_solve(const Eigen::VectorXd& r) const;

  /// Sparse weighted stiffness / mass forms (linear, p=2-type); the mass
  /// matrix doubles as the metric for bead-path arclength.
  const Eigen::SparseMatrix<double>& stiffness() const;
  const Eigen::SparseMatrix<double>& weighted_mass() const;

  /// int |x|^{-alpha} |u|^r.
  double weighted_lr(const FeFunction& u, double r_exp, double alpha_exp) const;
  /// Gradient of the above.
  Eigen::VectorXd grad_weighted_lr(const FeFunction& u, double r_exp, double alpha_exp) const;
  /// Same integral restricted to quadrature points with |x| < delta.
  double weighted_lr_ball(const FeFunction& u, double r_exp, double alpha_exp, double delta) const;

  /// int |x|^{-(a+1)p+c} |u|^{p-2} u  (sign pairing for eigenfunction normalization).
  double j_sign_pairing(const FeFunction& u) const;

  /// Value of u at quadrature point q of triangle t given coefficients.
  void zero_boundary(Eigen::VectorXd& v) const;

  const AssemblyOptions& options() const { return opts_; }

 private:
  struct TriGeom {
    int v[3];
    double area;
    double gx[3], gy[3];  // hat gradients
  };

  const std::vector<double>& weight_table(double exponent) const;
  double block_reduce(const std::function<double(int)>& per_tri) const;

  const Mesh* mesh_;
  ProblemParams params_;
  AssemblyOptions opts_;
  QuadratureRule rule_;
  std::vector<TriGeom> geom_;
  mutable std::map<double, std::vector<double>> wtabs_;  // exponent -> per-point w*|x|^{-e}
  mutable std::map<double, std::vector<double>> wsums_;  // exponent -> per-triangle sum
  Eigen::VectorXd hat_scale_;  // ||phi_i|| = Phi(phi_i)^{1/p}

  mutable std::shared_ptr<Eigen::SparseMatrix<double>> stiff_;
  mutable std::shared_ptr<Eigen::SparseMatrix<double>> mass_;
  mutable std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;

  const std::vector<double>& wsum(double exponent) const;
  void ensure_linear_forms() const;
};

/// One-off convenience wrappers matching the operation contracts.
double assemble_Phi(const FeFunction& u, const ProblemParams& params);
double assemble_J(const FeFunction& u, const ProblemParams& params);
double assemble_NF(const FeFunction& u, const ProblemParams& params, const Nonlinearity& nl);
double energy_I(const FeFunction& u, const ProblemParams& params, const Nonlinearity& nl);

/// Function field file: CSV `vertex_id,x,y,value`.
void write_field_csv(const std::string& path, const FeFunction& u);
Eigen::VectorXd read_field_csv(const std::string& path, const Mesh& mesh);

}  // namespace ckn
