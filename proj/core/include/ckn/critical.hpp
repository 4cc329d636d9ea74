#pragma once

#include <cstdint>
#include <vector>

#include "ckn/assembly.hpp"
#include "ckn/eigensolve.hpp"

namespace ckn {

enum class Regime { mountain_pass, linking };

struct SolveReport {
  double beta = 0.0;
  double alpha = 0.0;
  double residual_dual = 0.0;
  FeFunction u;
  int sign_changes = 0;
  Regime regime = Regime::mountain_pass;
  int iterations = 0;
  bool converged = false;
};

/// u_1 = t* e_1 with t* the smallest doubling-schedule value with I(t e_1) < -1.
FeFunction find_u1(const Assembler& as, const EigenPair& e1, const Nonlinearity& nl);

struct MpGeometry {
  double alpha;
  double rho;
};

/// Samples I on spheres ||u|| = rho for each candidate rho and returns the
/// largest rho with positive sampled minimum. Requires lambda < lambda_1.
MpGeometry check_mp_geometry(const Assembler& as, const Nonlinearity& nl,
                             const EigenPair& e1, const std::vector<double>& rho_grid,
                             int n_sphere_samples, std::uint64_t seed);

/// Bead-path minimax between 0 and u1: descend the max-I bead transversally
/// to the path, then reparameterize by arclength with fixed endpoints.
SolveReport mountain_pass(const Assembler& as, const Nonlinearity& nl, const FeFunction& u1,
                          double alpha, int n_path, double tol, int max_iter);

enum class KClass { K1, minus_K1, boundary_zone };

/// Connected-component test for the cone K: Rayleigh ratio against lambda_2
/// and the sign of the weighted pairing with e_1.
KClass classify_K(const Assembler& as, const FeFunction& u, const EigenPair& e1,
                  double lambda2, double tau_z = 1e-3, double j_floor = 1e-14);

struct LinkingFrame {
  FeFunction tilde_e1, tilde_e2;  // e_k / lambda_k^{1/p}, unit D-norm
  double lambda1 = 0.0, lambda2 = 0.0;
  double r = 0.0, rho = 0.0;
  double tau_z = 1e-3;
  int n_theta = 16, n_rad = 8;
  std::uint64_t seed = 42;
  /// Polar sheet over Q_r = {t1 e1~ + t2 e2~ : ||u|| <= r, t2 >= 0}.
  struct QNode {
    FeFunction u;
    double theta, s;  // direction angle in the (e1~,e2~) plane, radial fraction
    bool on_boundary;
  };
  std::vector<QNode> q_nodes;           // n_theta+1 by n_rad grid (+ center)
  std::vector<FeFunction> boundary;     // sampled dQ_r (segment + half circle)
  std::vector<FeFunction> z_rho;        // sampled {Phi = lambda2 J, ||u|| = rho}
};

/// Builds the sheet, boundary samples and Newton-projected Z_rho candidates.
LinkingFrame build_linking_frame(const Assembler& as, const EigenPair& e1, const EigenPair& e2,
                                 double r, double rho, int grid_density, std::uint64_t seed,
                                 double tau_z = 1e-3);

struct LinkingGeometry {
  double alpha;         // inf I over Z_rho samples
  double sup_boundary;  // sup I over dQ_r samples
  double r_final, rho_final;
  int escalations;
};

/// Verifies sup I <= 0 on dQ_r (doubling r while violated) and inf I > 0 on
/// Z_rho (halving rho); mutates the frame to the final (r, rho).
LinkingGeometry check_linking_geometry(LinkingFrame& frame, const Assembler& as,
                                       const Nonlinearity& nl, int max_escalations = 10);

/// Sheet minimax over Q_r with dQ_r pinned: descend the max-I interior node
/// transversally to the sheet, with guarded local smoothing.
SolveReport linking_solve(const LinkingFrame& frame, const Assembler& as, const Nonlinearity& nl,
                          double alpha, double tol, int max_iter);

}  // namespace ckn
