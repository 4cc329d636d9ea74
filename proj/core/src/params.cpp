#include "ckn/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ckn {

std::string to_string(Mode m) { return m == Mode::paper ? "paper" : "validation"; }

double critical_exponent(double p, double n_dom, double a, double b) {
  if (!(p > 1.0)) throw std::domain_error("critical_exponent: requires p > 1");
  if (!(p < n_dom)) throw std::domain_error("critical_exponent: requires p < n_dom");
  if (!(a <= b && b <= a + 1.0)) throw std::domain_error("critical_exponent: requires a <= b <= a+1");
  const double d = 1.0 + a - b;
  const double den = n_dom - d * p;
  if (!(den > 0.0)) throw std::domain_error("critical_exponent: n_dom <= (1+a-b)*p");
  return n_dom * p / den;
}

double ProblemParams::p_star(double n_dom) const { return critical_exponent(p, n_dom, a, b); }

bool AdmissibilityReport::ok() const {
  for (const auto& f : findings)
    if (f.severity == Severity::fail) return false;
  return true;
}

const Finding* AdmissibilityReport::find(const std::string& name) const {
  for (const auto& f : findings)
    if (f.name == name) return &f;
  return nullptr;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// hard: whether violation is a failure in the current mode (else warn)
void check(AdmissibilityReport& rep, const std::string& name, bool satisfied, double margin,
           bool hard, const std::string& detail) {
  Severity sev = satisfied ? Severity::pass : (hard ? Severity::fail : Severity::warn);
  rep.findings.push_back({name, sev, margin, detail});
}

}  // namespace

AdmissibilityReport validate_params(const ProblemParams& prm) {
  AdmissibilityReport rep;
  rep.mode = prm.mode;
  const bool paper = prm.mode == Mode::paper;
  const double n2 = static_cast<double>(prm.n);

  check(rep, "p>1", prm.p > 1.0, prm.p - 1.0, true, "p = " + fmt(prm.p));
  check(rep, "p<n", prm.p < n2, n2 - prm.p, paper, "2D domain dimension n = " + fmt(n2));
  check(rep, "p<n_eff", prm.p < prm.n_eff, prm.n_eff - prm.p, false,
        "radial effective dimension n_eff = " + fmt(prm.n_eff));
  check(rep, "a>=0", prm.a >= 0.0, prm.a, paper, "a = " + fmt(prm.a));

  // a < (n_dom - p)/p for the 2D domain; reported against n.
  const double a_cap = (n2 - prm.p) / prm.p;
  check(rep, "a<(n-p)/p", prm.a < a_cap, a_cap - prm.a, paper, "(n-p)/p = " + fmt(a_cap));
  check(rep, "a<=b", prm.a <= prm.b, prm.b - prm.a, paper, "");
  check(rep, "b<=a+1", prm.b <= prm.a + 1.0, prm.a + 1.0 - prm.b, paper, "");
  check(rep, "c>0", prm.c > 0.0, prm.c, paper, "c = " + fmt(prm.c));
  check(rep, "d in [0,1]", prm.d() >= 0.0 && prm.d() <= 1.0,
        std::min(prm.d(), 1.0 - prm.d()), false, "d = " + fmt(prm.d()));

  check(rep, "q>1", prm.q > 1.0, prm.q - 1.0, paper, "q = " + fmt(prm.q));
  check(rep, "q>p", prm.q > prm.p, prm.q - prm.p, true, "");

  // subcriticality with a strict margin so the compact embedding holds
  bool pstar_ok = false;
  double pstar_margin = -1.0;
  std::string pstar_detail;
  try {
    const double ps = prm.p_star(n2);
    pstar_margin = ps - 1e-6 - prm.q;
    pstar_ok = pstar_margin >= 0.0;
    pstar_detail = "p*(a,b) = " + fmt(ps);
  } catch (const std::domain_error& e) {
    pstar_detail = e.what();
  }
  check(rep, "q<p*(a,b)", pstar_ok, pstar_margin, paper, pstar_detail);

  check(rep, "theta>p", prm.theta > prm.p, prm.theta - prm.p, true, "theta = " + fmt(prm.theta));
  check(rep, "theta<=q", prm.theta <= prm.q, prm.q - prm.theta, true, "");
  check(rep, "kappa>=0", prm.kappa >= 0.0, prm.kappa, paper, "kappa = " + fmt(prm.kappa));
  check(rep, "lambda>=0", prm.lambda >= 0.0, prm.lambda, false, "lambda = " + fmt(prm.lambda));
  return rep;
}

}  // namespace ckn
