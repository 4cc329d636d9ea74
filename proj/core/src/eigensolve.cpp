#include "ckn/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ckn/errors.hpp"
#include "ckn/rng.hpp"

namespace ckn {

FeFunction normalize_to_M(const Assembler& as, const FeFunction& u, double j_floor) {
  const double ju = as.j(u);
  if (!(ju > j_floor)) throw GeometryError("normalize_to_M: J(u) below floor");
  return FeFunction(as.mesh(), u.coeffs / std::pow(ju, 1.0 / as.params().p));
}

namespace {

/// Preconditioned projected descent: minimize `value` subject to cons = 1,
/// where cons is `deg`-homogeneous and normalization is u / cons^{1/deg}.
/// Returns with the multiplier residual `value' - lambda cons'` below tol in
/// the scaled dual norm.
struct ConstrainedMin {
  const Assembler& as;
  std::function<double(const FeFunction&)> value;
  std::function<Eigen::VectorXd(const FeFunction&)> grad;
  std::function<double(const FeFunction&)> cons;
  std::function<Eigen::VectorXd(const FeFunction&)> cons_grad;
  double deg;
  // optional per-iteration observer (value, residual)
  std::function<void(double, double)> observe;

  FeFunction normalize(const FeFunction& u) const {
    const double cv = cons(u);
    if (!(cv > 1e-300)) throw GeometryError("constrained descent: degenerate constraint value");
    return FeFunction(as.mesh(), u.coeffs / std::pow(cv, 1.0 / deg));
  }

  struct Result {
    FeFunction u;
    double val;
    double resid;
    int iters;
  };

  Result run(FeFunction u0, double tol, int max_iter) const {
    FeFunction u = normalize(u0);
    double val = value(u);
    double step = 1.0;
    Eigen::VectorXd prev_u, prev_t;
    double resid = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      Eigen::VectorXd g = grad(u);
      Eigen::VectorXd gc = cons_grad(u);
      const double denom = gc.dot(u.coeffs);
      const double mult = denom != 0.0 ? g.dot(u.coeffs) / denom : 0.0;
      Eigen::VectorXd t = g - mult * gc;
      resid = as.dual_norm(t).scaled_max;
      if (observe) observe(val, resid);
      if (resid < tol) return {u, val, resid, it};

      // BB1 step from the previous tangential residual
      if (prev_u.size() > 0) {
        const Eigen::VectorXd du = u.coeffs - prev_u;
        const Eigen::VectorXd dt = t - prev_t;
        const double num = du.dot(du), den = du.dot(dt);
        if (den > 0.0 && std::isfinite(num / den)) step = std::clamp(num / den, 1e-12, 1e6);
      }
      prev_u = u.coeffs;
      prev_t = t;

      Eigen::VectorXd d = as.precond_solve(t);
      const double slope = t.dot(d);
      if (!(slope > 0.0)) {
        // preconditioner returned a non-descent direction; fall back
        d = t;
      }
      double s = step;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        try {
          FeFunction next = normalize(FeFunction(as.mesh(), u.coeffs - s * d));
          const double v = value(next);
          if (v <= val - 1e-4 * s * slope) {
            u = std::move(next);
            val = v;
            accepted = true;
            break;
          }
        } catch (const GeometryError&) {
          // trial point crossed the constraint degenerate set; shrink
        }
        s *= 0.5;
      }
      if (!accepted) {
        if (resid < 100.0 * tol) return {u, val, resid, it};
        throw NonConvergence("constrained descent stalled", val, resid, it);
      }
    }
    throw NonConvergence("constrained descent: max_iter reached", val, resid, max_iter);
  }
};

ConstrainedMin phi_on_M(const Assembler& as) {
  return ConstrainedMin{
      as,
      [&as](const FeFunction& u) { return as.phi(u); },
      [&as](const FeFunction& u) { return as.grad_phi(u); },
      [&as](const FeFunction& u) { return as.j(u); },
      [&as](const FeFunction& u) { return as.grad_j(u); },
      as.params().p,
      nullptr};
}

FeFunction default_e1_guess(const Assembler& as, std::uint64_t seed) {
  const Mesh& m = as.mesh();
  const double R = m.radius;
  auto rng = make_rng(seed, "eigen.lambda1");
  std::uniform_real_distribution<double> uni(0.0, 1e-3);
  Eigen::VectorXd c(m.n_vertices());
  for (int i = 0; i < m.n_vertices(); ++i) {
    const double r2 = m.vertices[i][0] * m.vertices[i][0] + m.vertices[i][1] * m.vertices[i][1];
    c[i] = std::max(0.0, R * R - r2) * (1.0 + uni(rng));
  }
  return FeFunction(m, std::move(c));
}

}  // namespace

EigenPair solve_lambda1(const Assembler& as, double tol, int max_iter, std::uint64_t seed) {
  auto problem = phi_on_M(as);
  ConstrainedMin::Result res;
  try {
    res = problem.run(default_e1_guess(as, seed), tol, max_iter);
  } catch (const NonConvergence& e) {
    throw NonConvergence("solve_lambda1: " + std::string(e.what()), e.value, e.residual,
                         e.iterations);
  }
  FeFunction e1 = std::move(res.u);
  if (as.j_sign_pairing(e1) < 0.0) e1.coeffs = -e1.coeffs;

  EigenPair pair;
  pair.k = 1;
  pair.value = res.val;
  pair.residual_norm = res.resid;
  pair.iters = res.iters;
  for (int i = 0; i < as.mesh().n_vertices(); ++i)
    if (!as.mesh().boundary[i] && e1.coeffs[i] < -1e-10) pair.negativity_warning = true;
  pair.func = std::move(e1);
  return pair;
}

FeFunction OddLoop::bead(int i) const {
  const int m = half();
  const int k = ((i % (2 * m)) + 2 * m) % (2 * m);
  if (k < m) return beads[k];
  FeFunction b = beads[k - m];
  b.coeffs = -b.coeffs;
  return b;
}

namespace {

double mass_dist(const Eigen::SparseMatrix<double>& M, const Eigen::VectorXd& a,
                 const Eigen::VectorXd& b) {
  const Eigen::VectorXd d = a - b;
  return std::sqrt(std::max(0.0, d.dot(M * d)));
}

}  // namespace

Mu2Result solve_mu2(const Assembler& as, const EigenPair& e1, int m_beads, double tol,
                    int max_iter, std::uint64_t seed, const OddLoop* warm) {
  if (m_beads < 4) throw std::invalid_argument("solve_mu2: m_beads >= 4 required");
  const Mesh& mesh = as.mesh();
  const auto& M = as.weighted_mass();

  OddLoop loop;
  if (warm && warm->half() >= 4) {
    loop.beads.reserve(warm->half());
    for (const auto& b : warm->beads) loop.beads.push_back(normalize_to_M(as, b));
    m_beads = loop.half();
  } else {
    // seed: the planar loop through e1 and a sign-changing field
    auto rng = make_rng(seed, "eigen.mu2");
    std::uniform_real_distribution<double> uni(-1e-3, 1e-3);
    Eigen::VectorXd w(mesh.n_vertices());
    const double R = mesh.radius;
    for (int i = 0; i < mesh.n_vertices(); ++i) {
      const double x = mesh.vertices[i][0], y = mesh.vertices[i][1];
      w[i] = x / R * std::max(0.0, R * R - x * x - y * y) + uni(rng);
    }
    FeFunction wf = normalize_to_M(as, FeFunction(mesh, std::move(w)));
    loop.beads.reserve(m_beads);
    for (int i = 0; i < m_beads; ++i) {
      const double th = M_PI * i / m_beads;
      Eigen::VectorXd c = std::cos(th) * e1.func.coeffs + std::sin(th) * wf.coeffs;
      loop.beads.push_back(normalize_to_M(as, FeFunction(mesh, std::move(c))));
    }
  }

  std::vector<double> vals(m_beads);
  for (int i = 0; i < m_beads; ++i) vals[i] = as.phi(loop.beads[i]);

  auto tangential = [&](const FeFunction& u, Eigen::VectorXd& t_out) {
    Eigen::VectorXd g = as.grad_phi(u);
    Eigen::VectorXd gc = as.grad_j(u);
    const double mult = g.dot(u.coeffs) / gc.dot(u.coeffs);
    t_out = g - mult * gc;
    return as.dual_norm(t_out).scaled_max;
  };

  auto reparameterize = [&]() {
    // arclength respread of the half loop in the J-weighted metric; oddness
    // is preserved because the other half is the antipodal image
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(m_beads + 1);
    for (int i = 0; i < m_beads; ++i) pts.push_back(loop.beads[i].coeffs);
    pts.push_back(-loop.beads[0].coeffs);
    std::vector<double> cum(m_beads + 1, 0.0);
    for (int i = 1; i <= m_beads; ++i) cum[i] = cum[i - 1] + mass_dist(M, pts[i], pts[i - 1]);
    const double L = cum[m_beads];
    if (!(L > 0.0)) throw GeometryError("solve_mu2: loop collapsed to a point");
    for (int i = 1; i <= m_beads; ++i)
      if (cum[i] - cum[i - 1] > 8.0 * L / m_beads)
        throw GeometryError("solve_mu2: bead spread bound exceeded");
    int seg = 0;
    for (int i = 1; i < m_beads; ++i) {
      const double target = L * i / m_beads;
      while (seg + 1 < m_beads && cum[seg + 1] < target) ++seg;
      const double den = cum[seg + 1] - cum[seg];
      const double tfrac = den > 0.0 ? (target - cum[seg]) / den : 0.0;
      Eigen::VectorXd c = (1.0 - tfrac) * pts[seg] + tfrac * pts[seg + 1];
      loop.beads[i] = normalize_to_M(as, FeFunction(mesh, std::move(c)));
      vals[i] = as.phi(loop.beads[i]);
    }
  };

  // per-bead line-search memory (BB1 over consecutive own iterates)
  std::vector<Eigen::VectorXd> prev_u(m_beads), prev_t(m_beads);
  std::vector<char> mem(m_beads, 0);
  std::vector<double> recent;
  double max_resid = std::numeric_limits<double>::infinity();
  const int string_iters = std::min(max_iter, warm ? 100 : 400);
  int it = 0;
  for (; it < string_iters; ++it) {
    const int imax =
        static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());

    max_resid = 0.0;
    double resid_at_max = 0.0;
    for (int i = 0; i < m_beads; ++i) {
      FeFunction& u = loop.beads[i];
      Eigen::VectorXd t;
      const double resid = tangential(u, t);
      max_resid = std::max(max_resid, resid);
      if (i == imax) resid_at_max = resid;
      if (resid < tol) continue;

      double step = 1.0;
      if (mem[i]) {
        const Eigen::VectorXd du = u.coeffs - prev_u[i];
        const Eigen::VectorXd dt = t - prev_t[i];
        const double den = du.dot(dt);
        if (den > 0.0) step = std::clamp(du.dot(du) / den, 1e-12, 1e6);
      }
      prev_u[i] = u.coeffs;
      prev_t[i] = t;
      mem[i] = 1;

      Eigen::VectorXd d = as.precond_solve(t);
      if (i == imax) {
        // the pass bead must not slide down along the loop
        Eigen::VectorXd tau = loop.bead(i + 1).coeffs - loop.bead(i - 1).coeffs;
        const double tn = tau.norm();
        if (tn > 0.0) {
          tau /= tn;
          d -= d.dot(tau) * tau;
        }
      }
      double slope = t.dot(d);
      if (!(slope > 0.0)) {
        d = t;
        slope = t.dot(d);
      }
      double s = step;
      for (int bt = 0; bt < 50; ++bt) {
        try {
          FeFunction cand = normalize_to_M(as, FeFunction(mesh, u.coeffs - s * d));
          const double v = as.phi(cand);
          if (v <= vals[i] - 1e-4 * s * slope) {
            u = std::move(cand);
            vals[i] = v;
            break;
          }
        } catch (const GeometryError&) {
          // trial point left the manifold chart; shrink
        }
        s *= 0.5;
      }
    }

    const double mx = *std::max_element(vals.begin(), vals.end());
    recent.push_back(mx);
    if (recent.size() > 20) recent.erase(recent.begin());
    const bool stable = recent.size() == 20 &&
                        std::abs(recent.front() - recent.back()) <
                            100.0 * tol * std::max(1.0, std::abs(mx));
    if (resid_at_max < tol && stable) break;

    if (it % 5 == 4 && !(resid_at_max < 10.0 * tol)) {
      reparameterize();
      std::fill(mem.begin(), mem.end(), 0);
    }
  }

  // Polish the pass bead to a genuine critical point. Stage one minimizes
  // Phi on {J = 1} within the hyperplane <J'(e1), u> = 0 (for p = 2 this is
  // exactly the second eigenspace); stage two releases the hyperplane and
  // takes damped steps that must shrink the full dual residual.
  int imax = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  FeFunction u2 = loop.beads[imax];
  {
    const Eigen::VectorXd cvec = as.grad_j(e1.func);
    const Eigen::VectorXd pc = as.precond_solve(cvec);
    const double cpc = cvec.dot(pc);
    if (!(cpc > 0.0)) throw GeometryError("solve_mu2: degenerate pairing with e1");
    auto project = [&](Eigen::VectorXd v) {
      v -= (cvec.dot(v) / cpc) * pc;
      return v;
    };
    u2 = normalize_to_M(as, FeFunction(mesh, project(u2.coeffs)));
    double val = as.phi(u2);
    double step = 1.0;
    Eigen::VectorXd pu, pt;
    bool have_mem = false;
    for (int k = 0; k < max_iter && it < max_iter; ++k, ++it) {
      Eigen::VectorXd t;
      const double resid_full = tangential(u2, t);
      if (resid_full < tol) break;
      const double nu = pc.dot(t) / cpc;
      Eigen::VectorXd tq = t - nu * cvec;
      const double resid_q = as.dual_norm(tq).scaled_max;
      if (resid_q < 0.05 * tol || resid_q < 0.01 * resid_full) break;  // hyperplane exhausted

      if (have_mem) {
        const Eigen::VectorXd du = u2.coeffs - pu;
        const Eigen::VectorXd dt = tq - pt;
        const double den = du.dot(dt);
        if (den > 0.0) step = std::clamp(du.dot(du) / den, 1e-12, 1e6);
      }
      pu = u2.coeffs;
      pt = tq;
      have_mem = true;

      Eigen::VectorXd d = project(as.precond_solve(tq));
      double slope = tq.dot(d);
      if (!(slope > 0.0)) {
        d = project(tq);
        slope = tq.dot(d);
        if (!(slope > 0.0)) break;
      }
      double s = step;
      bool ok = false;
      for (int bt = 0; bt < 60; ++bt) {
        try {
          FeFunction cand = normalize_to_M(as, FeFunction(mesh, u2.coeffs - s * d));
          const double v = as.phi(cand);
          if (v <= val - 1e-4 * s * slope) {
            u2 = std::move(cand);
            val = v;
            ok = true;
            break;
          }
        } catch (const GeometryError&) {
        }
        s *= 0.5;
      }
      if (!ok) break;
    }

    // stage two: full-residual damping (needed when p != 2, where the
    // hyperplane multiplier does not vanish identically)
    Eigen::VectorXd t;
    double resid = tangential(u2, t);
    for (int k = 0; resid >= tol && k < max_iter && it < max_iter; ++k, ++it) {
      Eigen::VectorXd d = as.precond_solve(t);
      double s = 1.0;
      bool ok = false;
      for (int bt = 0; bt < 60; ++bt) {
        try {
          FeFunction cand = normalize_to_M(as, FeFunction(mesh, u2.coeffs - s * d));
          Eigen::VectorXd tc;
          const double rc = tangential(cand, tc);
          if (rc < resid * (1.0 - 1e-3)) {
            u2 = std::move(cand);
            t = std::move(tc);
            resid = rc;
            ok = true;
            break;
          }
        } catch (const GeometryError&) {
        }
        s *= 0.5;
      }
      if (!ok) break;
    }
    max_resid = resid;
    if (!(resid < 100.0 * tol))
      throw NonConvergence("solve_mu2: pass bead residual did not converge", as.phi(u2), resid,
                           it);
    loop.beads[imax] = u2;
    vals[imax] = as.phi(u2);
  }

  if (!(vals[imax] > e1.value))
    throw GeometryError("solve_mu2: pass collapsed onto the first eigenvalue");

  EigenPair pair;
  pair.k = 2;
  pair.value = vals[imax];
  pair.func = loop.beads[imax];
  pair.residual_norm = max_resid;
  pair.iters = it;
  return {std::move(pair), std::move(loop)};
}

LinearPair linear_cross_check(const Assembler& as) {
  if (as.params().p != 2.0)
    throw std::invalid_argument("linear_cross_check: requires p = 2 exactly");
  const Mesh& mesh = as.mesh();
  const int n = mesh.n_vertices();

  std::vector<int> interior;
  interior.reserve(n);
  for (int i = 0; i < n; ++i)
    if (!mesh.boundary[i]) interior.push_back(i);
  const int ni = static_cast<int>(interior.size());
  std::vector<int> to_red(n, -1);
  for (int k = 0; k < ni; ++k) to_red[interior[k]] = k;

  const auto& K = as.stiffness();
  const auto& M = as.weighted_mass();
  std::vector<Eigen::Triplet<double>> kt, mt;
  for (int col = 0; col < K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator itK(K, col); itK; ++itK)
      if (to_red[itK.row()] >= 0 && to_red[itK.col()] >= 0)
        kt.emplace_back(to_red[itK.row()], to_red[itK.col()], itK.value());
  for (int col = 0; col < M.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator itM(M, col); itM; ++itM)
      if (to_red[itM.row()] >= 0 && to_red[itM.col()] >= 0)
        mt.emplace_back(to_red[itM.row()], to_red[itM.col()], itM.value());
  Eigen::SparseMatrix<double> Kr(ni, ni), Mr(ni, ni);
  Kr.setFromTriplets(kt.begin(), kt.end());
  Mr.setFromTriplets(mt.begin(), mt.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Kr);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("linear_cross_check: stiffness factorization failed");

  auto m_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(Mr * v)); };

  auto inverse_iterate = [&](Eigen::VectorXd v, const Eigen::VectorXd* deflate,
                             double& lambda_out, int& iters_out) {
    if (deflate) v -= v.dot(Mr * *deflate) * *deflate;
    v /= m_norm(v);
    double lambda = v.dot(Kr * v);
    int it = 0;
    for (; it < 2000; ++it) {
      Eigen::VectorXd x = solver.solve(Mr * v);
      if (deflate) x -= x.dot(Mr * *deflate) * *deflate;
      x /= m_norm(x);
      const double lnew = x.dot(Kr * x);
      v = x;
      if (std::abs(lnew - lambda) < 1e-12 * std::max(1.0, std::abs(lnew))) {
        lambda = lnew;
        break;
      }
      lambda = lnew;
    }
    lambda_out = lambda;
    iters_out = it;
    return v;
  };

  // deterministic starts: positive bubble for the first mode, odd for the second
  Eigen::VectorXd v1(ni), v2(ni);
  for (int k = 0; k < ni; ++k) {
    const auto& vx = mesh.vertices[interior[k]];
    const double r2 = vx[0] * vx[0] + vx[1] * vx[1];
    v1[k] = std::max(1e-6, mesh.radius * mesh.radius - r2);
    v2[k] = vx[0];
  }
  double l1 = 0.0, l2 = 0.0;
  int it1 = 0, it2 = 0;
  const Eigen::VectorXd u1 = inverse_iterate(v1, nullptr, l1, it1);
  const Eigen::VectorXd u2 = inverse_iterate(v2, &u1, l2, it2);

  LinearPair out;
  out.lambda1 = l1;
  out.lambda2 = l2;
  out.iters = it1 + it2;
  out.v1 = Eigen::VectorXd::Zero(n);
  out.v2 = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < ni; ++k) {
    out.v1[interior[k]] = u1[k];
    out.v2[interior[k]] = u2[k];
  }
  return out;
}

Lambda1Hierarchy solve_lambda1_hierarchy(const RunConfig& cfg, AssemblyOptions opts) {
  Lambda1Hierarchy out;
  const double grading = cfg.effective_grading();
  auto mesh = std::make_shared<Mesh>(build_disk_mesh(cfg.radius, 3, grading));
  mesh->level = 1;
  out.meshes.push_back(mesh);

  Assembler as(*mesh, cfg.params, opts);
  EigenPair pair = solve_lambda1(as, cfg.tol, cfg.max_iter, cfg.seed);
  out.lambda1.push_back(pair.value);

  for (int level = 2; level <= cfg.levels; ++level) {
    Refinement ref = refine(*out.meshes.back());
    auto fine = std::make_shared<Mesh>(std::move(ref.mesh));
    ref.mesh = Mesh{};  // coefficients prolong via edge_parents only
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(fine->n_vertices());
    warm.head(pair.func.coeffs.size()) = pair.func.coeffs;
    for (size_t k = 0; k < ref.edge_parents.size(); ++k) {
      const auto& e = ref.edge_parents[k];
      warm[ref.n_coarse + static_cast<int>(k)] =
          0.5 * (pair.func.coeffs[e[0]] + pair.func.coeffs[e[1]]);
    }
    out.meshes.push_back(fine);
    Assembler fas(*fine, cfg.params, opts);
    auto res = phi_on_M(fas).run(FeFunction(*fine, std::move(warm)), cfg.tol, cfg.max_iter);
    pair = EigenPair{};
    pair.k = 1;
    pair.value = res.val;
    pair.residual_norm = res.resid;
    pair.iters = res.iters;
    pair.func = std::move(res.u);
    if (fas.j_sign_pairing(pair.func) < 0.0) pair.func.coeffs = -pair.func.coeffs;
    out.lambda1.push_back(pair.value);
  }
  out.pair = std::move(pair);
  return out;
}

SpectrumHierarchy solve_spectrum_hierarchy(const RunConfig& cfg, AssemblyOptions opts,
                                           int m_beads) {
  SpectrumHierarchy out;
  const double grading = cfg.effective_grading();
  auto mesh = std::make_shared<Mesh>(build_disk_mesh(cfg.radius, 3, grading));
  mesh->level = 1;
  out.meshes.push_back(mesh);

  auto as = std::make_shared<Assembler>(*mesh, cfg.params, opts);
  EigenPair pair = solve_lambda1(*as, cfg.tol, cfg.max_iter, cfg.seed);
  out.lambda1.push_back(pair.value);
  Mu2Result mu2 = solve_mu2(*as, pair, m_beads, cfg.tol, cfg.max_iter, cfg.seed);

  for (int level = 2; level <= cfg.levels; ++level) {
    Refinement ref = refine(*out.meshes.back());
    auto fine = std::make_shared<Mesh>(std::move(ref.mesh));
    auto prolong_vec = [&](const Eigen::VectorXd& c) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(fine->n_vertices());
      w.head(c.size()) = c;
      for (size_t k = 0; k < ref.edge_parents.size(); ++k) {
        const auto& e = ref.edge_parents[k];
        w[ref.n_coarse + static_cast<int>(k)] = 0.5 * (c[e[0]] + c[e[1]]);
      }
      return w;
    };
    out.meshes.push_back(fine);
    as = std::make_shared<Assembler>(*fine, cfg.params, opts);

    auto res = phi_on_M(*as).run(FeFunction(*fine, prolong_vec(pair.func.coeffs)), cfg.tol,
                                 cfg.max_iter);
    EigenPair fine_pair;
    fine_pair.k = 1;
    fine_pair.value = res.val;
    fine_pair.residual_norm = res.resid;
    fine_pair.iters = res.iters;
    fine_pair.func = std::move(res.u);
    if (as->j_sign_pairing(fine_pair.func) < 0.0) fine_pair.func.coeffs = -fine_pair.func.coeffs;

    OddLoop warm;
    warm.beads.reserve(mu2.loop.half());
    for (const auto& b : mu2.loop.beads)
      warm.beads.emplace_back(*fine, prolong_vec(b.coeffs));
    pair = std::move(fine_pair);
    out.lambda1.push_back(pair.value);
    mu2 = solve_mu2(*as, pair, m_beads, cfg.tol, cfg.max_iter, cfg.seed, &warm);
  }

  out.pair1 = std::move(pair);
  out.mu2 = std::move(mu2);
  out.assembler = std::move(as);
  return out;
}

}  // namespace ckn
