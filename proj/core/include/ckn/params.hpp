#pragma once

#include <string>
#include <vector>

namespace ckn {

enum class Mode { paper, validation };

std::string to_string(Mode m);

/// All exponents and coefficients of the singular problem
///   -div(|x|^{-ap}|Du|^{p-2}Du) = lambda |x|^{-(a+1)p+c}|u|^{p-2}u + |x|^{-bq} f(u)
/// together with the spectral parameter and nonlinearity settings.
struct ProblemParams {
  Mode mode = Mode::paper;
  double p = 2.0;
  int n = 2;           // spatial dimension of the FEM domain (fixed 2)
  double n_eff = 2.0;  // effective dimension for the radial oracle
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double q = 3.0;
  double lambda = 0.0;
  double kappa = 1.0;
  double theta = 3.0;
  double big_m = 1.0;

  double d() const { return 1.0 + a - b; }
  /// p*(a,b) for the given effective dimension (n for 2D runs, n_eff for radial).
  double p_star(double n_dom) const;
};

/// q = p*(a,b) = n_dom * p / (n_dom - (1+a-b) p).
/// Throws std::domain_error if the denominator is nonpositive.
double critical_exponent(double p, double n_dom, double a, double b);

enum class Severity { pass, warn, fail };

struct Finding {
  std::string name;
  Severity severity;
  double margin;  // signed distance to the constraint boundary, >0 means satisfied
  std::string detail;
};

struct AdmissibilityReport {
  std::vector<Finding> findings;
  Mode mode;
  bool ok() const;
  const Finding* find(const std::string& name) const;
};

/// Reports every parameter constraint individually with its numeric margin.
/// In paper mode all range constraints are hard; in validation mode only
/// 1<p, q>p and theta in (p,q] are hard, the rest downgrade to warnings.
AdmissibilityReport validate_params(const ProblemParams& params);

}  // namespace ckn
