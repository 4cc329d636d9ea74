#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ckn/nonlinearity.hpp"
#include "ckn/params.hpp"

namespace ckn {

/// Graded 1D grid on [0,R]: r_i = R (i/m)^grading.
struct RadialGrid {
  std::vector<double> r;
  static RadialGrid build(double radius, int m, double grading);
  int intervals() const { return static_cast<int>(r.size()) - 1; }
  double radius() const { return r.back(); }
};

/// Nodal values on a RadialGrid; value at r_m is 0 (Dirichlet at the rim).
struct RadialFunction {
  const RadialGrid* grid = nullptr;
  Eigen::VectorXd values;  // size m+1, last entry 0

  RadialFunction() = default;
  RadialFunction(const RadialGrid& g, Eigen::VectorXd v);
  static RadialFunction zero(const RadialGrid& g);
};

/// Radial reductions with measure r^{n_eff-1} dr (midpoint rule, per-interval
/// difference quotients). Throws std::domain_error if any reduced exponent
/// <= -1 (not integrable at r=0).
double radial_Phi(const RadialFunction& u, const ProblemParams& params);
double radial_J(const RadialFunction& u, const ProblemParams& params);
double radial_NF(const RadialFunction& u, const ProblemParams& params, const Nonlinearity& nl);
double radial_I(const RadialFunction& u, const ProblemParams& params, const Nonlinearity& nl);

struct RadialEigenResult {
  double lambda1;
  RadialFunction e1;
  double residual;
  int iters;
};

/// Minimizes radial Phi on {radial_J = 1} by preconditioned projected
/// descent; the eigenfunction is sign-normalized positive on (0,R).
RadialEigenResult radial_lambda1(const ProblemParams& params, const RadialGrid& grid,
                                 double tol, int max_iter = 50000, std::uint64_t seed = 42);

struct RadialMpResult {
  double beta;
  RadialFunction u;
  double residual;
  int iters;
};

/// Bead-path mountain pass in the radial space (same scheme as the 2D
/// module). Requires lambda < lambda1_rad and an admissible nonlinearity.
RadialMpResult radial_mountain_pass(const ProblemParams& params, const Nonlinearity& nl,
                                    const RadialGrid& grid, int n_path = 17,
                                    double tol = 1e-6, int max_iter = 50000);

/// Radial profile CSV: header `r,value`.
void write_radial_csv(const std::string& path, const RadialFunction& u);

}  // namespace ckn
