#pragma once

#include <cstdint>
#include <vector>

#include "ckn/assembly.hpp"

namespace ckn {

struct CknEstimate {
  double r_exp = 0.0;
  double alpha_exp = 0.0;
  double c_est = 0.0;  // discrete best constant (lower bound)
  FeFunction maximizer;
  std::vector<double> history;  // per-iteration ratio values
  int iters = 0;
};

/// Maximizes ||u||_{r,alpha}^p / Phi(u) over the FE space by constrained
/// descent of Phi on the weighted-norm sphere. Diverging ratios signal an
/// inadmissible exponent pair and raise GeometryError.
CknEstimate estimate_ckn_constant(const Assembler& as, double r_exp, double alpha_exp,
                                  double tol, std::uint64_t seed, int max_iter = 20000);

struct TailFit {
  double fitted_slope;
  double predicted_slope;  // n - (alpha - b r) q / (q - r)
  double rel_error;
  std::vector<double> deltas;
  std::vector<double> masses;  // mean over sample pairs of m(delta)
};

/// Small-ball mass decay: fits log m(delta) against log delta for pairwise
/// differences of the given bounded samples.
TailFit tail_exponent_check(const Assembler& as, const std::vector<FeFunction>& u_samples,
                            double r_exp, double alpha_exp, const std::vector<double>& delta_grid);

struct SolutionReport {
  double I, Phi, J, NF;
  double residual_dual;
  int sign_changes;  // connected nodal sign components
  double max_abs;
  double max_x, max_y;
};

SolutionReport solution_report(const Assembler& as, const FeFunction& u, const Nonlinearity& nl);

/// Count of connected sign components over the vertex adjacency graph.
int count_sign_changes(const FeFunction& u, double tol = 1e-12);

}  // namespace ckn
