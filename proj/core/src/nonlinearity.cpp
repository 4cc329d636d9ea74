#include "ckn/nonlinearity.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ckn/rng.hpp"

namespace ckn {

namespace {

// bounded odd addition g(s) = s^3/(1+s^2)^2 with primitive
// G(s) = (log(1+s^2) + 1/(1+s^2) - 1)/2
double g_bounded(double s) {
  const double d = 1.0 + s * s;
  return s * s * s / (d * d);
}

double G_bounded(double s) {
  const double d = 1.0 + s * s;
  return 0.5 * (std::log(d) + 1.0 / d - 1.0);
}

double dg_bounded(double s) {
  const double s2 = s * s, d = 1.0 + s2;
  return (3.0 * s2 - s2 * s2) / (d * d * d);
}

}  // namespace

double Nonlinearity::f(double s) const {
  const double power = s == 0.0 ? 0.0 : kappa * std::pow(std::abs(s), q - 2.0) * s;
  switch (family) {
    case NlFamily::pure_power:
      return power;
    case NlFamily::power_plus_bounded:
      return power + kappa * g_bounded(s);
  }
  return 0.0;
}

double Nonlinearity::df(double s) const {
  const double power = s == 0.0 ? 0.0 : kappa * (q - 1.0) * std::pow(std::abs(s), q - 2.0);
  switch (family) {
    case NlFamily::pure_power:
      return power;
    case NlFamily::power_plus_bounded:
      return power + kappa * dg_bounded(s);
  }
  return 0.0;
}

double Nonlinearity::F(double s) const {
  const double power = kappa * std::pow(std::abs(s), q) / q;
  switch (family) {
    case NlFamily::pure_power:
      return power;
    case NlFamily::power_plus_bounded:
      return power + kappa * G_bounded(s);
  }
  return 0.0;
}

double Nonlinearity::growth_c1() const { return kappa; }

double Nonlinearity::growth_c2() const {
  // max_s |g_bounded| = 3*sqrt(3)/16 at s^2 = 3
  return family == NlFamily::power_plus_bounded ? kappa * 3.0 * std::sqrt(3.0) / 16.0 : 0.0;
}

Nonlinearity Nonlinearity::pure_power(double kappa, double q) {
  return {NlFamily::pure_power, kappa, q, q, 1.0};
}

Nonlinearity Nonlinearity::pure_power(double kappa, double q, double theta) {
  return {NlFamily::pure_power, kappa, q, theta, 1.0};
}

Nonlinearity Nonlinearity::power_plus_bounded(double kappa, double q, double theta, double big_m) {
  return {NlFamily::power_plus_bounded, kappa, q, theta, big_m};
}

bool ConditionReport::all_pass() const {
  for (const auto& c : conditions)
    if (!c.pass) return false;
  return true;
}

const ConditionFinding* ConditionReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

ConditionReport check_f_conditions(const Nonlinearity& nl, double p, double p_star,
                                   int samples, std::uint64_t seed) {
  if (samples < 100) throw std::invalid_argument("check_f_conditions: samples >= 100 required");
  ConditionReport rep;
  auto rng = make_rng(seed, "checkf");
  std::uniform_real_distribution<double> uni(-10.0, 10.0);

  // (f1): growth exponent of the built-in families is exactly q-1.
  {
    std::ostringstream d;
    d << "|f(s)| <= " << nl.growth_c1() << "|s|^{q-1} + " << nl.growth_c2()
      << ", q = " << nl.q << ", p*(a,b) = " << p_star;
    const bool ok = nl.q > 1.0 && nl.q < p_star;
    rep.conditions.push_back({"f1", ok, std::nullopt, d.str()});
  }

  // (f2): f(0) = 0 and s f(s) >= 0 on a grid plus random samples.
  {
    bool ok = nl.f(0.0) == 0.0;
    std::optional<double> witness;
    auto probe = [&](double s) {
      if (ok && s * nl.f(s) < -1e-15) {
        ok = false;
        witness = s;
      }
    };
    for (int i = 0; i <= 200; ++i) probe(-10.0 + 0.1 * i);
    for (int i = 0; i < samples; ++i) probe(uni(rng));
    rep.conditions.push_back({"f2", ok, witness, ok ? "s f(s) >= 0 on all samples" : "sign violation"});
  }

  // (f3): 0 < theta F(s) <= s f(s) at sampled |s| >= M (geometric schedule).
  {
    bool ok = true;
    std::optional<double> witness;
    std::string detail = "0 < theta F <= s f at |s| >= M";
    const double m0 = std::max(nl.big_m, 1e-6);
    for (double mag = m0; mag <= 1e6 * m0 && ok; mag *= 1.5) {
      for (double s : {mag, -mag}) {
        const double lhs = nl.theta * nl.F(s);
        const double rhs = s * nl.f(s);
        if (!(lhs > 0.0) || lhs > rhs * (1.0 + 1e-12)) {
          ok = false;
          witness = s;
          std::ostringstream d;
          d << "theta*F(s)=" << lhs << " vs s*f(s)=" << rhs << " at s=" << s;
          detail = d.str();
          break;
        }
      }
    }
    rep.conditions.push_back({"f3", ok, witness, detail});
  }

  // (f4): f(s)/|s|^{p-1} -> 0 along s = 2^{-k}.
  {
    const double r0 = std::abs(nl.f(1.0)) / 1.0;
    double last = r0;
    bool ok = true;
    std::optional<double> witness;
    for (int k = 1; k <= 30; ++k) {
      const double s = std::ldexp(1.0, -k);
      last = std::abs(nl.f(s)) / std::pow(s, p - 1.0);
    }
    if (!(last < 1e-6 * std::max(1.0, r0) && last < 1e-4)) {
      ok = false;
      witness = std::ldexp(1.0, -30);
    }
    std::ostringstream d;
    d << "f(s)/|s|^{p-1} at s=2^-30: " << last;
    rep.conditions.push_back({"f4", ok, witness, d.str()});
  }
  return rep;
}

}  // namespace ckn
