#include "ckn/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ckn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("config: bad numeric value for '" + key + "': " + v);
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long x = std::stol(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("config: bad integer value for '" + key + "': " + v);
  return x;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& p = cfg.params;
  if (key == "mode") {
    if (value == "paper") p.mode = Mode::paper;
    else if (value == "validation") p.mode = Mode::validation;
    else throw std::invalid_argument("config: mode must be 'paper' or 'validation'");
  } else if (key == "p") p.p = to_double(key, value);
  else if (key == "a") p.a = to_double(key, value);
  else if (key == "b") p.b = to_double(key, value);
  else if (key == "c") p.c = to_double(key, value);
  else if (key == "q") p.q = to_double(key, value);
  else if (key == "lambda") p.lambda = to_double(key, value);
  else if (key == "kappa") p.kappa = to_double(key, value);
  else if (key == "theta") p.theta = to_double(key, value);
  else if (key == "big_m") p.big_m = to_double(key, value);
  else if (key == "n_eff") p.n_eff = to_double(key, value);
  else if (key == "domain.radius") cfg.radius = to_double(key, value);
  else if (key == "mesh.levels") cfg.levels = static_cast<int>(to_long(key, value));
  else if (key == "mesh.grading") cfg.grading = to_double(key, value);
  else if (key == "solver.tol") cfg.tol = to_double(key, value);
  else if (key == "solver.max_iter") cfg.max_iter = static_cast<int>(to_long(key, value));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "report_format") cfg.report_format = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not 'key = value'");
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key=value: " + assignment);
  std::string key = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  const auto tb = key.find_last_not_of(" \t");
  key = key.substr(0, tb + 1);
  const auto vb = value.find_first_not_of(" \t");
  value = vb == std::string::npos ? "" : value.substr(vb);
  set_key(cfg, key, value);
}

std::map<std::string, std::string> RunConfig::resolved() const {
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  std::map<std::string, std::string> kv;
  kv["mode"] = to_string(params.mode);
  kv["p"] = num(params.p);
  kv["a"] = num(params.a);
  kv["b"] = num(params.b);
  kv["c"] = num(params.c);
  kv["q"] = num(params.q);
  kv["lambda"] = num(params.lambda);
  kv["kappa"] = num(params.kappa);
  kv["theta"] = num(params.theta);
  kv["big_m"] = num(params.big_m);
  kv["n_eff"] = num(params.n_eff);
  kv["domain.radius"] = num(radius);
  kv["mesh.levels"] = std::to_string(levels);
  kv["mesh.grading"] = num(effective_grading());
  kv["solver.tol"] = num(tol);
  kv["solver.max_iter"] = std::to_string(max_iter);
  kv["seed"] = std::to_string(seed);
  kv["out_dir"] = out_dir;
  kv["report_format"] = report_format;
  return kv;
}

}  // namespace ckn
