#include "ckn/critical.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

#include "ckn/errors.hpp"
#include "ckn/rng.hpp"
#include "ckn/verify.hpp"

namespace ckn {

namespace {

FeFunction random_direction(const Assembler& as, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(as.mesh().n_vertices());
  for (int i = 0; i < v.size(); ++i) v[i] = nd(rng);
  FeFunction u(as.mesh(), std::move(v));
  const double n = as.dnorm(u);
  if (!(n > 0.0)) throw GeometryError("degenerate random direction");
  u.coeffs /= n;
  return u;
}

FeFunction scaled(const FeFunction& u, double t) {
  return FeFunction(*u.mesh, t * u.coeffs);
}

/// Armijo backtracking step of I at u along descent direction d with slope
/// r.dot(d) > 0. Returns the accepted point and value, or nullopt-equivalent
/// via the ok flag.
struct StepResult {
  FeFunction u;
  double value;
  bool ok;
};

StepResult armijo_I(const Assembler& as, const Nonlinearity& nl, const FeFunction& u,
                    double val, const Eigen::VectorXd& d, double slope, double s0) {
  double s = s0;
  for (int bt = 0; bt < 60; ++bt) {
    FeFunction cand(*u.mesh, u.coeffs - s * d);
    const double v = as.energy(cand, nl);
    if (v <= val - 1e-4 * s * slope) return {std::move(cand), v, true};
    s *= 0.5;
  }
  return {u, val, false};
}

double mass_dist(const Assembler& as, const FeFunction& a, const FeFunction& b) {
  const Eigen::VectorXd d = a.coeffs - b.coeffs;
  return std::sqrt(std::max(0.0, d.dot(as.weighted_mass() * d)));
}

/// Damped Newton on the full residual I'(u) = 0. The Hessian is indefinite at
/// a saddle, so steps are accepted on dual-residual decrease with halving
/// damping; falls back to a preconditioned gradient step when the
/// factorization fails or the Newton direction stalls. Updates u, r, resid
/// in place and advances the shared iteration counter.
void newton_polish(const Assembler& as, const Nonlinearity& nl, FeFunction& u,
                   Eigen::VectorXd& r, double& resid, double tol, int max_iter, int& it) {
  const Mesh& mesh = as.mesh();
  auto try_direction = [&](const Eigen::VectorXd& d) {
    double s = 1.0;
    for (int bt = 0; bt < 40; ++bt) {
      FeFunction cand(mesh, u.coeffs - s * d);
      Eigen::VectorXd rc = as.residual(cand, nl);
      const double rn = as.dual_norm(rc).scaled_max;
      if (std::isfinite(rn) && rn < resid * (1.0 - 1e-6)) {
        u = std::move(cand);
        r = std::move(rc);
        resid = rn;
        return true;
      }
      s *= 0.5;
    }
    return false;
  };
  while (resid >= tol && it < max_iter) {
    ++it;
    bool stepped = false;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(as.hessian(u, nl));
    if (lu.info() == Eigen::Success) {
      Eigen::VectorXd d = lu.solve(r);
      as.zero_boundary(d);
      if (d.allFinite()) stepped = try_direction(d);
    }
    if (!stepped) stepped = try_direction(as.precond_solve(r));
    if (!stepped) break;
  }
}

}  // namespace

FeFunction find_u1(const Assembler& as, const EigenPair& e1, const Nonlinearity& nl) {
  double t = 1.0;
  for (int k = 0; k <= 40; ++k) {
    FeFunction cand = scaled(e1.func, t);
    if (as.energy(cand, nl) < -1.0) return cand;
    t *= 2.0;
  }
  throw GeometryError("find_u1: I(t e1) stays above -1 on the doubling schedule");
}

MpGeometry check_mp_geometry(const Assembler& as, const Nonlinearity& nl, const EigenPair& e1,
                             const std::vector<double>& rho_grid, int n_sphere_samples,
                             std::uint64_t seed) {
  if (rho_grid.empty()) throw std::invalid_argument("check_mp_geometry: empty rho grid");
  auto rng = make_rng(seed, "mp-geometry");

  std::vector<FeFunction> dirs;
  dirs.reserve(n_sphere_samples + 2);
  {
    FeFunction d1 = e1.func;
    const double n = as.dnorm(d1);
    d1.coeffs /= n;
    dirs.push_back(d1);
    dirs.push_back(scaled(d1, -1.0));
  }
  for (int i = 0; i < n_sphere_samples; ++i) dirs.push_back(random_direction(as, rng));

  MpGeometry best{0.0, 0.0};
  bool found = false;
  for (double rho : rho_grid) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) mn = std::min(mn, as.energy(scaled(d, rho), nl));
    if (mn > 0.0 && rho > best.rho) {
      best = {mn, rho};
      found = true;
    }
  }
  if (!found)
    throw GeometryError("check_mp_geometry: no sphere with positive sampled minimum of I");
  return best;
}

SolveReport mountain_pass(const Assembler& as, const Nonlinearity& nl, const FeFunction& u1,
                          double alpha, int n_path, double tol, int max_iter) {
  if (n_path < 9) throw std::invalid_argument("mountain_pass: n_path >= 9 required");

  std::vector<FeFunction> beads;
  std::vector<double> vals(n_path);
  beads.reserve(n_path);
  for (int i = 0; i < n_path; ++i) {
    beads.push_back(scaled(u1, double(i) / (n_path - 1)));
    vals[i] = as.energy(beads[i], nl);
  }

  // string stage: beads above the zero level descend perpendicular to the
  // path (the downhill tail is left alone -- I is unbounded below there and
  // only matters topologically), so the barrier region converges to the
  // steepest-descent connection through the pass
  std::vector<Eigen::VectorXd> prev_u(n_path), prev_r(n_path);
  std::vector<char> mem(n_path, 0);
  std::vector<double> recent;
  double resid_at_max = std::numeric_limits<double>::infinity();
  int it = 0;
  const int string_iters = std::min(max_iter, 600);
  for (; it < string_iters; ++it) {
    int imax = 1;
    for (int i = 1; i + 1 < n_path; ++i)
      if (vals[i] > vals[imax]) imax = i;
    if (!(vals[imax] > 0.0))
      throw GeometryError("mountain_pass: path level collapsed (max I <= 0)");

    resid_at_max = 0.0;
    for (int i = 1; i + 1 < n_path; ++i) {
      if (vals[i] <= 0.0) continue;
      FeFunction& u = beads[i];
      Eigen::VectorXd r = as.residual(u, nl);
      const double resid = as.dual_norm(r).scaled_max;
      if (i == imax) resid_at_max = resid;
      if (resid < tol) continue;

      double step = 1.0;
      if (mem[i]) {
        const Eigen::VectorXd du = u.coeffs - prev_u[i];
        const Eigen::VectorXd dr = r - prev_r[i];
        const double den = du.dot(dr);
        if (den > 0.0) step = std::clamp(du.dot(du) / den, 1e-12, 1e6);
      }
      prev_u[i] = u.coeffs;
      prev_r[i] = r;
      mem[i] = 1;

      Eigen::VectorXd d = as.precond_solve(r);
      Eigen::VectorXd tau = beads[i + 1].coeffs - beads[i - 1].coeffs;
      const double tn = tau.norm();
      if (tn > 0.0) {
        tau /= tn;
        d -= d.dot(tau) * tau;
      }
      double slope = r.dot(d);
      if (!(slope > 0.0)) {
        d = r;
        as.zero_boundary(d);
        slope = r.dot(d);
        if (!(slope > 0.0)) continue;
      }
      StepResult st = armijo_I(as, nl, u, vals[i], d, slope, step);
      if (st.ok) {
        u = std::move(st.u);
        vals[i] = st.value;
      }
    }
    if (resid_at_max < 10.0 * tol) break;
    const double mx = *std::max_element(vals.begin() + 1, vals.end() - 1);
    recent.push_back(mx);
    if (recent.size() > 20) recent.erase(recent.begin());
    if (recent.size() == 20 &&
        std::abs(recent.front() - recent.back()) < 1e-3 * std::max(1.0, std::abs(mx)))
      break;  // pass level settled; hand over to the polish stage
  }

  // polish stage: damped Newton on the pass bead (preconditioned gradient
  // steps cannot converge at an index-1 saddle). The string candidate can
  // drift into the trivial basin, so fall back to the I-maximizer along the
  // u1 ray, and reject any polished point below the geometric barrier alpha.
  int imax = 1;
  for (int i = 1; i + 1 < n_path; ++i)
    if (vals[i] > vals[imax]) imax = i;

  std::vector<FeFunction> cands;
  cands.push_back(beads[imax]);
  {
    FeFunction e = u1;
    const double en = as.dnorm(e);
    if (en > 0.0) {
      e.coeffs /= en;
      double best_t = 0.0, best_val = -std::numeric_limits<double>::infinity();
      for (double t = 1e-3 * en; t <= en; t *= 1.05) {
        const double v = as.energy(scaled(e, t), nl);
        if (v > best_val) {
          best_val = v;
          best_t = t;
        }
      }
      if (best_t > 0.0) cands.push_back(scaled(e, best_t));
    }
  }

  double last_beta = 0.0, last_resid = std::numeric_limits<double>::infinity();
  for (const FeFunction& cand : cands) {
    FeFunction u = cand;
    Eigen::VectorXd r = as.residual(u, nl);
    double resid = as.dual_norm(r).scaled_max;
    newton_polish(as, nl, u, r, resid, tol, max_iter, it);
    const double beta = as.energy(u, nl);
    last_beta = beta;
    last_resid = resid;
    const bool nontrivial = as.dnorm(u) > 1e-6 && beta >= 0.5 * alpha;
    if (resid < 100.0 * tol && nontrivial) {
      if (!(beta > 0.0))
        throw GeometryError("mountain_pass: converged to a nonpositive critical level");
      SolveReport rep;
      rep.beta = beta;
      rep.alpha = alpha;
      rep.residual_dual = resid;
      rep.u = u;
      rep.sign_changes = count_sign_changes(u);
      rep.regime = Regime::mountain_pass;
      rep.iterations = it;
      rep.converged = resid < tol;
      return rep;
    }
  }
  throw NonConvergence("mountain_pass: no candidate converged to a level above alpha/2",
                       last_beta, last_resid, it);
}

KClass classify_K(const Assembler& as, const FeFunction& u, const EigenPair& e1, double lambda2,
                  double tau_z, double j_floor) {
  const double ju = as.j(u);
  if (ju <= j_floor) return KClass::boundary_zone;
  const double ratio = as.phi(u) / ju;
  if (ratio > lambda2 * (1.0 - tau_z)) return KClass::boundary_zone;
  const double pairing = as.grad_j(u).dot(e1.func.coeffs);
  if (pairing > 0.0) return KClass::K1;
  if (pairing < 0.0) return KClass::minus_K1;
  return KClass::boundary_zone;
}

namespace {

FeFunction sheet_direction(const Assembler& as, const LinkingFrame& fr, double theta) {
  FeFunction v(*fr.tilde_e1.mesh,
               std::cos(theta) * fr.tilde_e1.coeffs + std::sin(theta) * fr.tilde_e2.coeffs);
  const double n = as.dnorm(v);
  if (!(n > 0.0)) throw GeometryError("linking frame: degenerate sheet direction");
  v.coeffs /= n;
  return v;
}

void rebuild_sheet(LinkingFrame& fr, const Assembler& as) {
  fr.q_nodes.clear();
  fr.boundary.clear();
  const double pi = 3.14159265358979323846;
  for (int it = 0; it <= fr.n_theta; ++it) {
    const double theta = pi * it / fr.n_theta;
    FeFunction v = sheet_direction(as, fr, theta);
    for (int is = 1; is <= fr.n_rad; ++is) {
      const double s = double(is) / fr.n_rad;
      LinkingFrame::QNode node;
      node.u = FeFunction(*v.mesh, s * fr.r * v.coeffs);
      node.theta = theta;
      node.s = s;
      node.on_boundary = (is == fr.n_rad) || it == 0 || it == fr.n_theta;
      fr.q_nodes.push_back(std::move(node));
    }
  }
  // sampled dQ_r: the half circle ||u|| = r, t2 >= 0, and the t2 = 0 segment
  for (int it = 0; it <= 2 * fr.n_theta; ++it) {
    const double theta = pi * it / (2 * fr.n_theta);
    FeFunction v = sheet_direction(as, fr, theta);
    fr.boundary.emplace_back(*v.mesh, fr.r * v.coeffs);
  }
  for (int is = -fr.n_rad; is <= fr.n_rad; ++is) {
    const double t = fr.r * is / fr.n_rad;
    fr.boundary.emplace_back(*fr.tilde_e1.mesh, t * fr.tilde_e1.coeffs);
  }
}

void build_z_samples(LinkingFrame& fr, const Assembler& as) {
  fr.z_rho.clear();
  auto rng = make_rng(fr.seed, "linking-z");
  auto g = [&](const FeFunction& u) { return as.phi(u) - fr.lambda2 * as.j(u); };
  FeFunction e1n = fr.tilde_e1;  // g(e1) = (lambda1 - lambda2) J < 0
  const int want = 16;
  int tries = 0;
  while (static_cast<int>(fr.z_rho.size()) < want && tries < 40 * want) {
    ++tries;
    FeFunction w = random_direction(as, rng);
    if (!(g(w) > 0.0)) continue;
    // bisection on the segment between w (g > 0) and e1 (g < 0)
    double lo = 0.0, hi = 1.0;  // t = weight on e1
    FeFunction mid = w;
    for (int bi = 0; bi < 80; ++bi) {
      const double t = 0.5 * (lo + hi);
      mid = FeFunction(*w.mesh, (1.0 - t) * w.coeffs + t * e1n.coeffs);
      const double gm = g(mid);
      if (gm > 0.0)
        lo = t;
      else
        hi = t;
      if (std::abs(gm) < 1e-12 * std::max(1.0, as.phi(mid))) break;
    }
    const double n = as.dnorm(mid);
    if (!(n > 0.0)) continue;
    // Z is a cone: rescaling to ||u|| = rho stays on {Phi = lambda2 J}
    fr.z_rho.emplace_back(*mid.mesh, (fr.rho / n) * mid.coeffs);
  }
  if (static_cast<int>(fr.z_rho.size()) < want / 2)
    throw GeometryError("linking frame: could not sample the constraint cone Z");
}

}  // namespace

LinkingFrame build_linking_frame(const Assembler& as, const EigenPair& e1, const EigenPair& e2,
                                 double r, double rho, int grid_density, std::uint64_t seed,
                                 double tau_z) {
  if (!(r > 0.0) || !(rho > 0.0) || !(rho < r))
    throw std::invalid_argument("build_linking_frame: need 0 < rho < r");
  if (grid_density < 1) throw std::invalid_argument("build_linking_frame: grid_density >= 1");
  LinkingFrame fr;
  fr.lambda1 = e1.value;
  fr.lambda2 = e2.value;
  fr.r = r;
  fr.rho = rho;
  fr.tau_z = tau_z;
  fr.seed = seed;
  fr.n_theta = 4 * grid_density;
  fr.n_rad = 2 * grid_density;
  fr.tilde_e1 = FeFunction(as.mesh(), e1.func.coeffs / std::pow(e1.value, 1.0 / as.params().p));
  fr.tilde_e2 = FeFunction(as.mesh(), e2.func.coeffs / std::pow(e2.value, 1.0 / as.params().p));
  rebuild_sheet(fr, as);
  build_z_samples(fr, as);
  return fr;
}

LinkingGeometry check_linking_geometry(LinkingFrame& frame, const Assembler& as,
                                       const Nonlinearity& nl, int max_escalations) {
  LinkingGeometry geo{};
  geo.escalations = 0;

  auto sup_bd = [&]() {
    double s = -std::numeric_limits<double>::infinity();
    for (const auto& u : frame.boundary) s = std::max(s, as.energy(u, nl));
    return s;
  };
  auto inf_z = [&]() {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& u : frame.z_rho) s = std::min(s, as.energy(u, nl));
    return s;
  };

  geo.sup_boundary = sup_bd();
  while (geo.sup_boundary > 1e-9) {
    if (++geo.escalations > max_escalations)
      throw GeometryError("check_linking_geometry: sup I on dQ_r stays positive");
    frame.r *= 2.0;
    rebuild_sheet(frame, as);
    geo.sup_boundary = sup_bd();
  }

  geo.alpha = inf_z();
  while (!(geo.alpha > 0.0) || !(frame.rho < frame.r)) {
    if (++geo.escalations > max_escalations)
      throw GeometryError("check_linking_geometry: inf I on Z_rho not positive");
    frame.rho *= 0.5;
    for (auto& u : frame.z_rho) u.coeffs *= 0.5;
    geo.alpha = inf_z();
  }

  geo.r_final = frame.r;
  geo.rho_final = frame.rho;
  return geo;
}

SolveReport linking_solve(const LinkingFrame& frame, const Assembler& as, const Nonlinearity& nl,
                          double alpha, double tol, int max_iter) {
  const int nt = frame.n_theta, nr = frame.n_rad;
  const int n_nodes = (nt + 1) * nr;
  if (static_cast<int>(frame.q_nodes.size()) != n_nodes)
    throw std::invalid_argument("linking_solve: frame sheet not built");
  const Mesh& mesh = as.mesh();

  auto idx = [&](int it, int is) { return it * nr + (is - 1); };  // is in [1, nr]

  std::vector<FeFunction> node(n_nodes);
  std::vector<double> vals(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    node[i] = frame.q_nodes[i].u;
    vals[i] = as.energy(node[i], nl);
  }
  // reference spacing for the tear check
  double spacing0 = 0.0;
  int n_edges = 0;
  for (int it = 0; it <= nt; ++it)
    for (int is = 1; is < nr; ++is) {
      spacing0 += mass_dist(as, node[idx(it, is)], node[idx(it, is + 1)]);
      ++n_edges;
    }
  spacing0 = n_edges > 0 ? spacing0 / n_edges : 0.0;

  // sheet stage: descend the max node transversally to the sheet until the
  // minimax level settles, then hand the pass node to the Newton polish
  double resid = 0.0;
  double step = 1.0;
  Eigen::VectorXd prev_u, prev_r;
  int prev_i = -1;
  std::vector<double> recent;
  int iter = 0;
  int i_pass = -1;
  const int sheet_iters = std::min(max_iter, 300);
  for (; iter < sheet_iters; ++iter) {
    int bt_i = -1, bt_s = -1;
    double mx = -std::numeric_limits<double>::infinity();
    for (int it = 1; it < nt; ++it)
      for (int is = 1; is < nr; ++is)
        if (vals[idx(it, is)] > mx) {
          mx = vals[idx(it, is)];
          bt_i = it;
          bt_s = is;
        }
    if (bt_i < 0) throw GeometryError("linking_solve: empty interior");
    if (mx < 0.5 * alpha)
      throw GeometryError("linking_solve: sheet level collapsed below alpha/2");

    const int i0 = idx(bt_i, bt_s);
    i_pass = i0;
    FeFunction& u = node[i0];
    Eigen::VectorXd r = as.residual(u, nl);
    resid = as.dual_norm(r).scaled_max;
    if (resid < 10.0 * tol) break;

    if (i0 == prev_i && prev_u.size() > 0) {
      const Eigen::VectorXd du = u.coeffs - prev_u;
      const Eigen::VectorXd dr = r - prev_r;
      const double den = du.dot(dr);
      step = den > 0.0 ? std::clamp(du.dot(du) / den, 1e-12, 1e6) : 1.0;
    } else {
      step = 1.0;
    }
    prev_u = u.coeffs;
    prev_r = r;
    prev_i = i0;

    Eigen::VectorXd d = as.precond_solve(r);
    // project out the two local sheet tangents
    Eigen::VectorXd t1 = node[idx(bt_i + 1, bt_s)].coeffs - node[idx(bt_i - 1, bt_s)].coeffs;
    Eigen::VectorXd t2 =
        (bt_s + 1 <= nr ? node[idx(bt_i, bt_s + 1)].coeffs
                        : Eigen::VectorXd(Eigen::VectorXd::Zero(u.coeffs.size()))) -
        (bt_s - 1 >= 1 ? node[idx(bt_i, bt_s - 1)].coeffs
                       : Eigen::VectorXd(Eigen::VectorXd::Zero(u.coeffs.size())));
    double n1 = t1.norm();
    if (n1 > 0.0) {
      t1 /= n1;
      d -= d.dot(t1) * t1;
      t2 -= t2.dot(t1) * t1;
    }
    double n2 = t2.norm();
    if (n2 > 0.0) {
      t2 /= n2;
      d -= d.dot(t2) * t2;
    }
    double slope = r.dot(d);
    if (!(slope > 0.0)) {
      d = r;
      as.zero_boundary(d);
      slope = r.dot(d);
    }
    StepResult st = armijo_I(as, nl, u, mx, d, slope, step);
    if (st.ok) {
      u = std::move(st.u);
      vals[i0] = st.value;
    } else {
      break;  // minimax level cannot improve; polish from here
    }

    recent.push_back(mx);
    if (recent.size() > 30) recent.erase(recent.begin());
    if (recent.size() == 30 &&
        std::abs(recent.front() - recent.back()) < 1e-3 * std::max(1.0, std::abs(mx)))
      break;  // pass level settled

    // guarded smoothing: pull stretched interior nodes toward the local mean
    for (int it = 1; it < nt; ++it)
      for (int is = 1; is < nr; ++is) {
        const int i = idx(it, is);
        Eigen::VectorXd mean = node[idx(it - 1, is)].coeffs + node[idx(it + 1, is)].coeffs;
        int cnt = 2;
        if (is + 1 <= nr) {
          mean += node[idx(it, is + 1)].coeffs;
          ++cnt;
        }
        if (is - 1 >= 1) {
          mean += node[idx(it, is - 1)].coeffs;
          ++cnt;
        }
        mean /= cnt;
        FeFunction m(mesh, std::move(mean));
        const double gap = mass_dist(as, node[i], m);
        if (spacing0 > 0.0 && gap > 10.0 * spacing0)
          throw GeometryError("linking_solve: sheet tore (node spacing exceeded guard)");
        if (i != i0 && spacing0 > 0.0 && gap > 2.0 * spacing0) {
          node[i] = FeFunction(mesh, 0.7 * node[i].coeffs + 0.3 * m.coeffs);
          vals[i] = as.energy(node[i], nl);
        }
      }
  }
  if (i_pass < 0) throw GeometryError("linking_solve: empty interior");

  // polish candidates: the sheet pass node, then the I-maximizer along the
  // tilde_e2 ray of Q_r (the discrete sheet max can under-shoot the saddle
  // and land in the trivial solution's Newton basin)
  std::vector<FeFunction> cands;
  cands.push_back(node[i_pass]);
  {
    double best_t = 0.0, best_v = -std::numeric_limits<double>::infinity();
    for (double t = 1e-3 * frame.r; t <= frame.r; t *= 1.05) {
      const double v = as.energy(scaled(frame.tilde_e2, t), nl);
      if (v > best_v) {
        best_v = v;
        best_t = t;
      }
    }
    if (best_t > 0.0) cands.push_back(scaled(frame.tilde_e2, best_t));
  }

  double last_beta = 0.0;
  for (const FeFunction& cand : cands) {
    FeFunction u = cand;
    Eigen::VectorXd r = as.residual(u, nl);
    resid = as.dual_norm(r).scaled_max;
    newton_polish(as, nl, u, r, resid, tol, max_iter, iter);
    const double beta = as.energy(u, nl);
    last_beta = beta;
    const bool nontrivial = as.dnorm(u) > 1e-6 && beta >= 0.5 * alpha;
    if (resid < 100.0 * tol && nontrivial) {
      SolveReport rep;
      rep.beta = beta;
      rep.alpha = alpha;
      rep.residual_dual = resid;
      rep.u = u;
      rep.sign_changes = count_sign_changes(u);
      rep.regime = Regime::linking;
      rep.iterations = iter;
      rep.converged = resid < tol;
      return rep;
    }
  }
  throw NonConvergence("linking_solve: no candidate converged to a level above alpha/2",
                       last_beta, resid, iter);
}

}  // namespace ckn
