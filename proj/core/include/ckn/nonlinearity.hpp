#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ckn {

enum class NlFamily { pure_power, power_plus_bounded };

/// Built-in nonlinearity family with closed-form primitive F(s) = int_0^s f.
///   pure_power:          f(s) = kappa |s|^{q-2} s
///   power_plus_bounded:  f(s) = kappa (|s|^{q-2} s + s^3/(1+s^2)^2)
struct Nonlinearity {
  NlFamily family = NlFamily::pure_power;
  double kappa = 1.0;
  double q = 4.0;
  double theta = 4.0;
  double big_m = 1.0;

  double f(double s) const;
  double F(double s) const;
  double df(double s) const;

  /// Subcritical growth constants: |f(s)| <= c1 |s|^{q-1} + c2.
  double growth_c1() const;
  double growth_c2() const;

  static Nonlinearity pure_power(double kappa, double q);
  static Nonlinearity pure_power(double kappa, double q, double theta);
  static Nonlinearity power_plus_bounded(double kappa, double q, double theta, double big_m);
};

struct ConditionFinding {
  std::string name;  // "f1".."f4"
  bool pass;
  std::optional<double> witness;  // sample point violating the condition
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionFinding> conditions;
  bool all_pass() const;
  const ConditionFinding* find(const std::string& name) const;
};

/// Checks (f1)-(f4) for a built-in family: growth exponent against p*(a,b),
/// sign condition on a grid plus random samples, the superlinearity
/// inequality 0 < theta F(s) <= s f(s) at sampled |s| >= M, and the
/// vanishing of f(s)/|s|^{p-1} along a geometric sequence s -> 0.
ConditionReport check_f_conditions(const Nonlinearity& nl, double p, double p_star,
                                   int samples, std::uint64_t seed);

}  // namespace ckn
