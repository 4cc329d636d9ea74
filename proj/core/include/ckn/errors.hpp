#pragma once

#include <stdexcept>
#include <string>

namespace ckn {

/// Thrown when an iterative solver exhausts its budget. Carries the last
/// value and residual so callers can report a useful diagnostic.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double last_value, double last_residual, int iters)
      : std::runtime_error(what), value(last_value), residual(last_residual), iterations(iters) {}
  double value;
  double residual;
  int iterations;
};

/// A required geometric or admissibility condition could not be satisfied
/// (mountain-pass sphere, linking frame, parameter ranges, ...).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ckn
