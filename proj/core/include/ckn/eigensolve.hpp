#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ckn/assembly.hpp"
#include "ckn/config.hpp"

namespace ckn {

struct EigenPair {
  double value = 0.0;
  FeFunction func;
  int k = 1;
  double residual_norm = 0.0;
  int iters = 0;
  bool negativity_warning = false;
};

/// u / J(u)^{1/p}; J(result) = 1. Throws GeometryError if J(u) <= floor.
FeFunction normalize_to_M(const Assembler& as, const FeFunction& u, double j_floor = 1e-14);

/// (lambda_1, e_1) by preconditioned projected descent of Phi on {J=1},
/// started from a positive seeded field and sign-normalized positive.
EigenPair solve_lambda1(const Assembler& as, double tol, int max_iter, std::uint64_t seed);

/// Odd loop h: S^1 -> M stored as m independent beads; bead(i+m) = -bead(i).
struct OddLoop {
  std::vector<FeFunction> beads;  // the m independent beads, all on M
  int half() const { return static_cast<int>(beads.size()); }
  /// Bead i of the full loop of 2m, applying the antipodal identification.
  FeFunction bead(int i) const;
};

struct Mu2Result {
  EigenPair pair;  // k = 2, value = mu2
  OddLoop loop;
};

/// mu_2 by the odd-loop minimax: sweep-descend all beads tangentially to M
/// (the max bead transversally to the loop so it cannot slide off the pass),
/// renormalize, re-spread by arclength in the J-weighted metric. An optional
/// warm loop (e.g. prolonged from a coarser mesh) replaces the seeded start.
Mu2Result solve_mu2(const Assembler& as, const EigenPair& e1, int m_beads, double tol,
                    int max_iter, std::uint64_t seed, const OddLoop* warm = nullptr);

struct LinearPair {
  double lambda1;
  double lambda2;
  Eigen::VectorXd v1, v2;  // full coefficient vectors, mass-normalized
  int iters;
};

/// Independent linear path at p=2: weighted stiffness/mass pencil, inverse
/// iteration with deflation. Rejects p != 2.
LinearPair linear_cross_check(const Assembler& as);

/// Nested-mesh continuation for lambda_1: solve on the coarse base, prolong,
/// re-solve, up to cfg.levels. Keeps the per-level values for convergence
/// diagnostics.
struct Lambda1Hierarchy {
  std::vector<std::shared_ptr<Mesh>> meshes;
  std::vector<double> lambda1;
  EigenPair pair;  // on meshes.back()
};
Lambda1Hierarchy solve_lambda1_hierarchy(const RunConfig& cfg, AssemblyOptions opts = {});

/// Full spectral pipeline with nested-mesh continuation for both lambda_1 and
/// the odd loop of mu_2; the returned assembler lives on the finest mesh.
struct SpectrumHierarchy {
  std::vector<std::shared_ptr<Mesh>> meshes;
  std::vector<double> lambda1;
  EigenPair pair1;  // on meshes.back()
  Mu2Result mu2;    // on meshes.back()
  std::shared_ptr<Assembler> assembler;
};
SpectrumHierarchy solve_spectrum_hierarchy(const RunConfig& cfg, AssemblyOptions opts = {},
                                           int m_beads = 8);

}  // namespace ckn
