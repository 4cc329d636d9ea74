#include "ckn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include "ckn/errors.hpp"
#include "ckn/rng.hpp"

namespace ckn {

CknEstimate estimate_ckn_constant(const Assembler& as, double r_exp, double alpha_exp,
                                  double tol, std::uint64_t seed, int max_iter) {
  if (!(r_exp > 1.0)) throw std::invalid_argument("estimate_ckn_constant: r > 1 required");
  const ProblemParams& prm = as.params();
  const double p = prm.p;
  const double dim = prm.n_eff;
  if (prm.mode == Mode::paper && p < dim && r_exp > dim * p / (dim - p) + 1e-12)
    throw GeometryError("estimate_ckn_constant: r exceeds the critical Sobolev exponent");
  if (alpha_exp > (1.0 + prm.a) * r_exp + dim * (1.0 - r_exp / p) + 1e-12)
    throw GeometryError("estimate_ckn_constant: alpha violates the interpolation bound");
  auto rng = make_rng(seed, "ckn-estimate");
  std::normal_distribution<double> nd(0.0, 1.0);

  // start from a positive bubble with a small seeded perturbation
  const Mesh& mesh = as.mesh();
  Eigen::VectorXd v(mesh.n_vertices());
  const double R = mesh.radius;
  for (int i = 0; i < v.size(); ++i) {
    const auto& pt = mesh.vertices[i];
    v[i] = (R * R - pt[0] * pt[0] - pt[1] * pt[1]) + 1e-3 * nd(rng);
  }
  FeFunction u(mesh, std::move(v));

  auto normalize = [&](FeFunction w) {
    const double s = as.weighted_lr(w, r_exp, alpha_exp);
    if (!(s > 1e-300)) throw GeometryError("estimate_ckn_constant: degenerate norm");
    w.coeffs /= std::pow(s, 1.0 / r_exp);
    return w;
  };
  u = normalize(std::move(u));

  CknEstimate est;
  est.r_exp = r_exp;
  est.alpha_exp = alpha_exp;

  double val = as.phi(u);
  est.history.push_back(val);
  double step = 1.0;
  Eigen::VectorXd prev_u, prev_t;
  double resid = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    // divergence guard: the constrained minimum of Phi running away toward 0
    // means the ratio ||u||^p / Phi is unbounded (inadmissible exponent pair)
    if (est.history.size() > 100 &&
        val < 0.1 * est.history[est.history.size() - 101] &&
        val < 1e-10 * est.history.front())
      throw GeometryError("estimate_ckn_constant: ratio diverging, exponents inadmissible");

    Eigen::VectorXd g = as.grad_phi(u);
    Eigen::VectorXd gc = as.grad_weighted_lr(u, r_exp, alpha_exp);
    const double den = gc.dot(u.coeffs);
    if (!(std::abs(den) > 1e-300))
      throw GeometryError("estimate_ckn_constant: degenerate constraint gradient");
    Eigen::VectorXd t = g - (g.dot(u.coeffs) / den) * gc;
    resid = as.dual_norm(t).scaled_max;
    if (resid < tol) break;

    if (prev_u.size() > 0) {
      const Eigen::VectorXd du = u.coeffs - prev_u;
      const Eigen::VectorXd dt = t - prev_t;
      const double d2 = du.dot(dt);
      step = d2 > 0.0 ? std::clamp(du.dot(du) / d2, 1e-12, 1e6) : 1.0;
    }
    prev_u = u.coeffs;
    prev_t = t;

    Eigen::VectorXd d = as.precond_solve(t);
    double slope = t.dot(d);
    if (!(slope > 0.0)) {
      d = t;
      as.zero_boundary(d);
      slope = t.dot(d);
    }
    double s = step;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      try {
        FeFunction cand = normalize(FeFunction(mesh, u.coeffs - s * d));
        const double vv = as.phi(cand);
        if (vv <= val - 1e-4 * s * slope) {
          u = std::move(cand);
          val = vv;
          ok = true;
          break;
        }
      } catch (const GeometryError&) {
        // trial point crossed the constraint degenerate set; shrink
      }
      s *= 0.5;
    }
    est.iters = it + 1;
    est.history.push_back(val);
    if (!ok) {
      if (resid < 100.0 * tol) break;
      throw NonConvergence("estimate_ckn_constant stalled", val, resid, it);
    }
  }
  if (!(resid < 100.0 * tol))
    throw NonConvergence("estimate_ckn_constant: max_iter reached", val, resid, est.iters);

  // Phi_min on the unit sphere of ||.||_{r,alpha}; the best constant in
  // ||u||_{r,alpha}^p <= C Phi(u) is its reciprocal
  est.c_est = 1.0 / val;
  est.maximizer = u;
  return est;
}

TailFit tail_exponent_check(const Assembler& as, const std::vector<FeFunction>& u_samples,
                            double r_exp, double alpha_exp,
                            const std::vector<double>& delta_grid) {
  if (u_samples.empty()) throw std::invalid_argument("tail_exponent_check: no samples");
  if (delta_grid.size() < 4)
    throw std::invalid_argument("tail_exponent_check: need at least four deltas");
  const ProblemParams& prm = as.params();
  if (!(prm.q > r_exp)) throw std::invalid_argument("tail_exponent_check: requires r < q");
  if (!(alpha_exp < (1.0 + prm.a) * r_exp + prm.n_eff * (1.0 - r_exp / prm.p)))
    throw GeometryError("tail_exponent_check: alpha not strictly below the compactness bound");
  for (double d : delta_grid)
    if (!(d > 0.0) || !(d < as.mesh().radius))
      throw std::invalid_argument("tail_exponent_check: delta grid must lie inside the domain");

  // masses over sample pairs u - u'; a lone sample pairs with zero
  std::vector<FeFunction> diffs;
  for (size_t i = 0; i < u_samples.size(); ++i)
    for (size_t j = i + 1; j < u_samples.size(); ++j)
      diffs.emplace_back(*u_samples[i].mesh, u_samples[i].coeffs - u_samples[j].coeffs);
  if (diffs.empty()) diffs.push_back(u_samples.front());

  TailFit fit;
  fit.deltas = delta_grid;
  fit.masses.resize(delta_grid.size(), 0.0);
  for (size_t di = 0; di < delta_grid.size(); ++di) {
    double acc = 0.0;
    for (const auto& u : diffs) acc += as.weighted_lr_ball(u, r_exp, alpha_exp, delta_grid[di]);
    fit.masses[di] = acc / diffs.size();
  }

  // least-squares slope of log m against log delta
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(fit.masses[i] > 0.0)) continue;
    const double x = std::log(delta_grid[i]);
    const double y = std::log(fit.masses[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 4) throw GeometryError("tail_exponent_check: fewer than 4 deltas with nonzero mass");
  fit.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  fit.predicted_slope =
      prm.n_eff - (alpha_exp - prm.b * r_exp) * prm.q / (prm.q - r_exp);
  fit.rel_error = std::abs(fit.fitted_slope - fit.predicted_slope) /
                  std::max(1.0, std::abs(fit.predicted_slope));
  return fit;
}

SolutionReport solution_report(const Assembler& as, const FeFunction& u, const Nonlinearity& nl) {
  SolutionReport rep{};
  rep.Phi = as.phi(u);
  rep.J = as.j(u);
  rep.NF = as.nf(u, nl);
  const ProblemParams& prm = as.params();
  rep.I = rep.Phi / prm.p - prm.lambda * rep.J / prm.p - rep.NF;
  rep.residual_dual = as.dual_norm(as.residual(u, nl)).scaled_max;
  rep.sign_changes = count_sign_changes(u);
  rep.max_abs = 0.0;
  rep.max_x = rep.max_y = 0.0;
  for (int i = 0; i < u.coeffs.size(); ++i) {
    if (std::abs(u.coeffs[i]) > rep.max_abs) {
      rep.max_abs = std::abs(u.coeffs[i]);
      rep.max_x = u.mesh->vertices[i][0];
      rep.max_y = u.mesh->vertices[i][1];
    }
  }
  return rep;
}

int count_sign_changes(const FeFunction& u, double tol) {
  const Mesh& mesh = *u.mesh;
  const int n = mesh.n_vertices();
  std::vector<std::vector<int>> adj(n);
  for (const auto& tr : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      adj[tr[e]].push_back(tr[(e + 1) % 3]);
      adj[tr[(e + 1) % 3]].push_back(tr[e]);
    }
  std::vector<int> comp(n, -1);
  int n_comp = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0 || std::abs(u.coeffs[s]) <= tol) continue;
    const bool pos = u.coeffs[s] > 0.0;
    ++n_comp;
    std::queue<int> q;
    q.push(s);
    comp[s] = n_comp;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v]) {
        if (comp[w] >= 0 || std::abs(u.coeffs[w]) <= tol) continue;
        if ((u.coeffs[w] > 0.0) != pos) continue;
        comp[w] = n_comp;
        q.push(w);
      }
    }
  }
  return n_comp;
}

}  // namespace ckn
