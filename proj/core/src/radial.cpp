#include "ckn/radial.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/SparseCore>
#include <algorithm>
#include <limits>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "ckn/errors.hpp"

namespace ckn {

namespace {

constexpr double kEps = 1e-8;  // |u'|^{p-2} regularization, same as the 2D module

/// Surface measure of the unit sphere in (real) dimension n_eff.
double omega(double n_eff) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n_eff) / std::tgamma(0.5 * n_eff);
}

struct Reduced {
  double e_phi, e_j, e_nf;  // exponents of r in the reduced measures
  double om;
};

Reduced reduced_exponents(const ProblemParams& prm) {
  Reduced rd;
  rd.e_phi = prm.n_eff - 1.0 - prm.a * prm.p;
  rd.e_j = prm.n_eff - 1.0 - (prm.a + 1.0) * prm.p + prm.c;
  rd.e_nf = prm.n_eff - 1.0 - prm.b * prm.q;
  rd.om = omega(prm.n_eff);
  if (rd.e_phi <= -1.0 || rd.e_j <= -1.0 || rd.e_nf <= -1.0)
    throw std::domain_error("radial: reduced exponent <= -1, integrand not integrable at r=0");
  return rd;
}

double midpoint_integral(const RadialGrid& g, double exponent,
                         const std::function<double(int, double, double)>& f) {
  // f(interval, u_mid placeholder handled by caller); here caller supplies values
  double s = 0.0;
  for (int i = 0; i < g.intervals(); ++i) {
    const double rm = 0.5 * (g.r[i] + g.r[i + 1]);
    const double dr = g.r[i + 1] - g.r[i];
    s += std::pow(rm, exponent) * f(i, rm, dr) * dr;
  }
  return s;
}

}  // namespace

RadialGrid RadialGrid::build(double radius, int m, double grading) {
  if (!(radius > 0.0) || m < 2 || !(grading >= 1.0))
    throw std::invalid_argument("RadialGrid: radius>0, m>=2, grading>=1 required");
  RadialGrid g;
  g.r.resize(m + 1);
  for (int i = 0; i <= m; ++i) g.r[i] = radius * std::pow(double(i) / m, grading);
  return g;
}

RadialFunction::RadialFunction(const RadialGrid& g, Eigen::VectorXd v)
    : grid(&g), values(std::move(v)) {
  if (values.size() != static_cast<int>(g.r.size()))
    throw std::invalid_argument("RadialFunction: value count mismatch");
  values[values.size() - 1] = 0.0;
}

RadialFunction RadialFunction::zero(const RadialGrid& g) {
  return RadialFunction(g, Eigen::VectorXd::Zero(g.r.size()));
}

double radial_Phi(const RadialFunction& u, const ProblemParams& prm) {
  const Reduced rd = reduced_exponents(prm);
  const auto& g = *u.grid;
  return rd.om * midpoint_integral(g, rd.e_phi, [&](int i, double, double dr) {
    const double du = (u.values[i + 1] - u.values[i]) / dr;
    return std::pow(std::abs(du), prm.p);
  });
}

double radial_J(const RadialFunction& u, const ProblemParams& prm) {
  const Reduced rd = reduced_exponents(prm);
  return rd.om * midpoint_integral(*u.grid, rd.e_j, [&](int i, double, double) {
    const double um = 0.5 * (u.values[i] + u.values[i + 1]);
    return std::pow(std::abs(um), prm.p);
  });
}

double radial_NF(const RadialFunction& u, const ProblemParams& prm, const Nonlinearity& nl) {
  const Reduced rd = reduced_exponents(prm);
  return rd.om * midpoint_integral(*u.grid, rd.e_nf, [&](int i, double, double) {
    return nl.F(0.5 * (u.values[i] + u.values[i + 1]));
  });
}

double radial_I(const RadialFunction& u, const ProblemParams& prm, const Nonlinearity& nl) {
  return radial_Phi(u, prm) / prm.p - prm.lambda * radial_J(u, prm) / prm.p - radial_NF(u, prm, nl);
}

namespace {

Eigen::VectorXd radial_grad_phi(const RadialFunction& u, const ProblemParams& prm) {
  const Reduced rd = reduced_exponents(prm);
  const auto& g = *u.grid;
  const int m = g.intervals();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m + 1);
  for (int i = 0; i < m; ++i) {
    const double rm = 0.5 * (g.r[i] + g.r[i + 1]);
    const double dr = g.r[i + 1] - g.r[i];
    const double du = (u.values[i + 1] - u.values[i]) / dr;
    const double fac = rd.om * std::pow(rm, rd.e_phi) * prm.p *
                       std::pow(du * du + kEps * kEps, 0.5 * prm.p - 1.0) * du;
    r[i] -= fac;
    r[i + 1] += fac;
  }
  r[m] = 0.0;
  return r;
}

Eigen::VectorXd radial_grad_j(const RadialFunction& u, const ProblemParams& prm) {
  const Reduced rd = reduced_exponents(prm);
  const auto& g = *u.grid;
  const int m = g.intervals();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m + 1);
  for (int i = 0; i < m; ++i) {
    const double rm = 0.5 * (g.r[i] + g.r[i + 1]);
    const double dr = g.r[i + 1] - g.r[i];
    const double um = 0.5 * (u.values[i] + u.values[i + 1]);
    if (um == 0.0) continue;
    const double fac = rd.om * std::pow(rm, rd.e_j) * prm.p *
                       std::pow(std::abs(um), prm.p - 2.0) * um * dr * 0.5;
    r[i] += fac;
    r[i + 1] += fac;
  }
  r[m] = 0.0;
  return r;
}

Eigen::VectorXd radial_grad_f(const RadialFunction& u, const ProblemParams& prm,
                              const Nonlinearity& nl) {
  const Reduced rd = reduced_exponents(prm);
  const auto& g = *u.grid;
  const int m = g.intervals();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m + 1);
  for (int i = 0; i < m; ++i) {
    const double rm = 0.5 * (g.r[i] + g.r[i + 1]);
    const double dr = g.r[i + 1] - g.r[i];
    const double um = 0.5 * (u.values[i] + u.values[i + 1]);
    const double fac = rd.om * std::pow(rm, rd.e_nf) * nl.f(um) * dr * 0.5;
    r[i] += fac;
    r[i + 1] += fac;
  }
  r[m] = 0.0;
  return r;
}

Eigen::VectorXd radial_residual(const RadialFunction& u, const ProblemParams& prm,
                                const Nonlinearity& nl) {
  return radial_grad_phi(u, prm) / prm.p - (prm.lambda / prm.p) * radial_grad_j(u, prm) -
         radial_grad_f(u, prm, nl);
}

/// Linear radial stiffness (p=2 form) used as a preconditioner metric.
class RadialPrecond {
 public:
  RadialPrecond(const RadialGrid& g, const ProblemParams& prm) {
    const Reduced rd = reduced_exponents(prm);
    const int m = g.intervals();
    std::vector<Eigen::Triplet<double>> tr;
    for (int i = 0; i < m; ++i) {
      const double rm = 0.5 * (g.r[i] + g.r[i + 1]);
      const double dr = g.r[i + 1] - g.r[i];
      const double k = rd.om * std::pow(rm, rd.e_phi) / dr;
      if (i < m) {
        tr.emplace_back(i, i, k);
        if (i + 1 < m) {
          tr.emplace_back(i + 1, i + 1, k);
          tr.emplace_back(i, i + 1, -k);
          tr.emplace_back(i + 1, i, -k);
        }
      }
    }
    Eigen::SparseMatrix<double> K(m, m);
    K.setFromTriplets(tr.begin(), tr.end());
    ldlt_.compute(K);
    if (ldlt_.info() != Eigen::Success)
      throw std::runtime_error("radial preconditioner factorization failed");
    m_ = m;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m_ + 1);
    x.head(m_) = ldlt_.solve(r.head(m_));
    return x;
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  int m_ = 0;
};

/// Jacobian of the radial residual (weak Hessian of the radial energy) on
/// the m free nodes 0..m-1; same kEps regularization as radial_grad_phi.
Eigen::SparseMatrix<double> radial_hessian(const RadialFunction& u, const ProblemParams& prm,
                                           const Nonlinearity& nl) {
  const Reduced rd = reduced_exponents(prm);
  const auto& g = *u.grid;
  const int m = g.intervals();
  std::vector<Eigen::Triplet<double>> tr;
  tr.reserve(4 * m);
  auto add = [&](int i, int j, double v) {
    if (i < m && j < m) tr.emplace_back(i, j, v);
  };
  for (int i = 0; i < m; ++i) {
    const double rm = 0.5 * (g.r[i] + g.r[i + 1]);
    const double dr = g.r[i + 1] - g.r[i];
    const double du = (u.values[i + 1] - u.values[i]) / dr;
    const double gg = du * du + kEps * kEps;
    const double k = rd.om * std::pow(rm, rd.e_phi) *
                     (std::pow(gg, 0.5 * prm.p - 1.0) +
                      (prm.p - 2.0) * std::pow(gg, 0.5 * prm.p - 2.0) * du * du) /
                     dr;
    add(i, i, k);
    add(i, i + 1, -k);
    add(i + 1, i, -k);
    add(i + 1, i + 1, k);

    const double um = 0.5 * (u.values[i] + u.values[i + 1]);
    const double jj = um == 0.0 ? 0.0
                                : prm.lambda * (prm.p - 1.0) * rd.om * std::pow(rm, rd.e_j) *
                                      std::pow(std::abs(um), prm.p - 2.0) * dr * 0.25;
    const double ff = rd.om * std::pow(rm, rd.e_nf) * nl.df(um) * dr * 0.25;
    for (int di = 0; di < 2; ++di)
      for (int dj = 0; dj < 2; ++dj) add(i + di, i + dj, -(jj + ff));
  }
  Eigen::SparseMatrix<double> h(m, m);
  h.setFromTriplets(tr.begin(), tr.end());
  return h;
}

double radial_dual_max(const Eigen::VectorXd& r) {
  double mx = 0.0;
  for (int i = 0; i < r.size(); ++i) mx = std::max(mx, std::abs(r[i]));
  return mx;
}

RadialFunction normalize_radial(const RadialFunction& u, const ProblemParams& prm) {
  const double ju = radial_J(u, prm);
  if (!(ju > 1e-300)) throw GeometryError("radial: degenerate J");
  return RadialFunction(*u.grid, u.values / std::pow(ju, 1.0 / prm.p));
}

}  // namespace

RadialEigenResult radial_lambda1(const ProblemParams& prm, const RadialGrid& grid, double tol,
                                 int max_iter, std::uint64_t seed) {
  (void)seed;  // deterministic start suffices in 1D
  const int m = grid.intervals();
  Eigen::VectorXd v(m + 1);
  const double R = grid.radius();
  for (int i = 0; i <= m; ++i) v[i] = R * R - grid.r[i] * grid.r[i];
  RadialFunction u = normalize_radial(RadialFunction(grid, std::move(v)), prm);
  RadialPrecond P(grid, prm);

  double val = radial_Phi(u, prm);
  double resid = 0.0;
  double step = 1.0;
  double stag_val = val;
  int stag = 0;
  Eigen::VectorXd prev_u, prev_t;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd g = radial_grad_phi(u, prm);
    Eigen::VectorXd gc = radial_grad_j(u, prm);
    const double mult = g.dot(u.values) / gc.dot(u.values);
    Eigen::VectorXd t = g - mult * gc;
    resid = radial_dual_max(t);
    // stagnation guard: the value has settled to machine precision but the
    // absolute residual floors just above a tight tol
    if (val < stag_val * (1.0 - 1e-13)) {
      stag_val = val;
      stag = 0;
    } else {
      ++stag;
    }
    if (resid < tol || (stag > 50 && resid < 100.0 * tol)) {
      if (u.values[0] < 0.0) u.values = -u.values;
      return {val, u, resid, it};
    }
    if (prev_u.size() > 0) {
      const Eigen::VectorXd du = u.values - prev_u;
      const Eigen::VectorXd dt = t - prev_t;
      const double den = du.dot(dt);
      if (den > 0.0) step = std::clamp(du.dot(du) / den, 1e-12, 1e6);
    }
    prev_u = u.values;
    prev_t = t;
    Eigen::VectorXd d = P.solve(t);
    double slope = t.dot(d);
    if (!(slope > 0.0)) {
      d = t;
      slope = t.dot(d);
    }
    double s = step;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      try {
        RadialFunction cand = normalize_radial(RadialFunction(grid, u.values - s * d), prm);
        const double vv = radial_Phi(cand, prm);
        if (vv <= val - 1e-4 * s * slope) {
          u = std::move(cand);
          val = vv;
          ok = true;
          break;
        }
      } catch (const GeometryError&) {
        // trial point crossed {J = 0}; shrink
      }
      s *= 0.5;
    }
    if (!ok) {
      if (resid < 100.0 * tol) {
        if (u.values[0] < 0.0) u.values = -u.values;
        return {val, u, resid, it};
      }
      throw NonConvergence("radial_lambda1 stalled", val, resid, it);
    }
  }
  throw NonConvergence("radial_lambda1: max_iter reached", val, resid, max_iter);
}

RadialMpResult radial_mountain_pass(const ProblemParams& prm, const Nonlinearity& nl,
                                    const RadialGrid& grid, int n_path, double tol,
                                    int max_iter) {
  if (n_path < 9) throw std::invalid_argument("radial_mountain_pass: n_path >= 9 required");
  RadialEigenResult eig = radial_lambda1(prm, grid, std::max(tol, 1e-8));
  if (!(prm.lambda < eig.lambda1))
    throw GeometryError("radial_mountain_pass: requires lambda < lambda1_rad");

  // endpoint u1 = t* e1 with I < -1 on the doubling schedule
  RadialFunction u1 = eig.e1;
  {
    double t = 1.0;
    bool found = false;
    for (int k = 0; k <= 40; ++k) {
      RadialFunction cand(grid, t * eig.e1.values);
      if (radial_I(cand, prm, nl) < -1.0) {
        u1 = std::move(cand);
        found = true;
        break;
      }
      t *= 2.0;
    }
    if (!found) throw GeometryError("radial_mountain_pass: no mountain pass geometry detected");
  }

  RadialPrecond P(grid, prm);
  std::vector<RadialFunction> beads;
  std::vector<double> vals(n_path);
  beads.reserve(n_path);
  for (int i = 0; i < n_path; ++i) {
    const double t = double(i) / (n_path - 1);
    beads.emplace_back(grid, t * u1.values);
    vals[i] = radial_I(beads[i], prm, nl);
  }

  // string stage: beads above the zero level descend perpendicular to the
  // path, mirroring the 2D module (the downhill tail only matters
  // topologically and is left alone)
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
      throw GeometryError("radial_mountain_pass: path collapsed (max I <= 0)");

    resid_at_max = 0.0;
    for (int i = 1; i + 1 < n_path; ++i) {
      if (vals[i] <= 0.0) continue;
      RadialFunction& u = beads[i];
      Eigen::VectorXd r = radial_residual(u, prm, nl);
      const double rr = radial_dual_max(r);
      if (i == imax) resid_at_max = rr;
      if (rr < tol) continue;

      double step = 1.0;
      if (mem[i]) {
        const Eigen::VectorXd du = u.values - prev_u[i];
        const Eigen::VectorXd dr = r - prev_r[i];
        const double den = du.dot(dr);
        if (den > 0.0) step = std::clamp(du.dot(du) / den, 1e-12, 1e6);
      }
      prev_u[i] = u.values;
      prev_r[i] = r;
      mem[i] = 1;

      Eigen::VectorXd d = P.solve(r);
      Eigen::VectorXd tau = beads[i + 1].values - beads[i - 1].values;
      const double tn = tau.norm();
      if (tn > 0.0) {
        tau /= tn;
        d -= d.dot(tau) * tau;
      }
      double slope = r.dot(d);
      if (!(slope > 0.0)) {
        d = r;
        slope = r.dot(d);
        if (!(slope > 0.0)) continue;
      }
      double s = step;
      for (int bt = 0; bt < 60; ++bt) {
        RadialFunction cand(grid, u.values - s * d);
        const double v = radial_I(cand, prm, nl);
        if (v <= vals[i] - 1e-4 * s * slope) {
          u = std::move(cand);
          vals[i] = v;
          break;
        }
        s *= 0.5;
      }
    }
    if (resid_at_max < 10.0 * tol) break;
    const double mx = *std::max_element(vals.begin() + 1, vals.end() - 1);
    recent.push_back(mx);
    if (recent.size() > 20) recent.erase(recent.begin());
    if (recent.size() == 20 &&
        std::abs(recent.front() - recent.back()) < 1e-3 * std::max(1.0, std::abs(mx)))
      break;  // pass level settled; hand over to the Newton polish
  }

  // Newton polish of the pass bead (damped, accepted on residual decrease)
  int imax = 1;
  for (int i = 1; i + 1 < n_path; ++i)
    if (vals[i] > vals[imax]) imax = i;
  RadialFunction u = beads[imax];
  const int m = grid.intervals();
  Eigen::VectorXd r = radial_residual(u, prm, nl);
  double resid = radial_dual_max(r);
  while (resid >= tol && it < max_iter) {
    ++it;
    bool stepped = false;
    auto try_direction = [&](const Eigen::VectorXd& d) {
      double s = 1.0;
      for (int bt = 0; bt < 40; ++bt) {
        RadialFunction cand(grid, u.values - s * d);
        Eigen::VectorXd rc = radial_residual(cand, prm, nl);
        const double rn = radial_dual_max(rc);
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
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(radial_hessian(u, prm, nl));
    if (lu.info() == Eigen::Success) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(m + 1);
      d.head(m) = lu.solve(r.head(m));
      if (d.allFinite()) stepped = try_direction(d);
    }
    if (!stepped) stepped = try_direction(P.solve(r));
    if (!stepped) break;
  }
  if (!(resid < 100.0 * tol))
    throw NonConvergence("radial_mountain_pass: residual did not converge",
                         radial_I(u, prm, nl), resid, it);
  const double beta = radial_I(u, prm, nl);
  if (!(beta > 0.0))
    throw GeometryError("radial_mountain_pass: converged to a nonpositive critical level");
  return {beta, u, resid, it};
}

void write_radial_csv(const std::string& path, const RadialFunction& u) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.precision(17);
  f << "r,value\n";
  for (size_t i = 0; i < u.grid->r.size(); ++i) f << u.grid->r[i] << "," << u.values[i] << "\n";
}

}  // namespace ckn
