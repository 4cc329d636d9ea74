#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ckn/params.hpp"

namespace ckn {

/// Resolved run configuration: problem parameters plus domain, mesh and
/// solver settings. Parsed from a plain `key = value` text file.
struct RunConfig {
  ProblemParams params;
  double radius = 1.0;
  int levels = 4;        // mesh refinement level (1 = coarse base mesh)
  double grading = -1.0; // <0 means "default": 2 when a>0, else 1
  double tol = 1e-6;
  int max_iter = 20000;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  std::string report_format = "json";

  double effective_grading() const { return grading > 0 ? grading : (params.a > 0 ? 2.0 : 1.0); }

  /// The resolved key/value view used to echo the config into reports.
  std::map<std::string, std::string> resolved() const;
};

/// Parses config text. Unknown keys are a hard error (std::invalid_argument).
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Applies one `key=value` override in place; same key set as the file.
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace ckn
