// ckn-varcrit: eigenvalues and critical points of the weighted p-Laplacian
// on a disk, with quantitative verification of the underlying inequalities.
//
// Usage: ckn-varcrit <command> --config <file> [--set k=v]... [--threads N]
// Commands: mesh eigen mp link ckn tail checkf report

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ckn/assembly.hpp"
#include "ckn/config.hpp"
#include "ckn/critical.hpp"
#include "ckn/eigensolve.hpp"
#include "ckn/errors.hpp"
#include "ckn/mesh.hpp"
#include "ckn/nonlinearity.hpp"
#include "ckn/params.hpp"
#include "ckn/radial.hpp"
#include "ckn/rng.hpp"
#include "ckn/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Ctx {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 1;
  // command-specific
  double opt_r = -1.0;      // ckn/tail: exponent r
  double opt_alpha = -1e30; // ckn/tail: exponent alpha
  std::string field_path;   // report: solution field CSV
};

ckn::RunConfig load_config(const Ctx& ctx) {
  ckn::RunConfig cfg =
      ctx.config_path.empty() ? ckn::RunConfig{} : ckn::parse_config_file(ctx.config_path);
  for (const auto& ov : ctx.overrides) ckn::apply_override(cfg, ov);
  return cfg;
}

json config_json(const ckn::RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.resolved()) j[k] = v;
  return j;
}

json base_report(const std::string& command, const ckn::RunConfig& cfg) {
  json j;
  j["command"] = command;
  j["mode"] = ckn::to_string(cfg.params.mode);
  j["config"] = config_json(cfg);
  return j;
}

void write_report(const ckn::RunConfig& cfg, const json& j) {
  fs::create_directories(cfg.out_dir);
  const fs::path path = fs::path(cfg.out_dir) / "report.json";
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

void require_admissible(const ckn::RunConfig& cfg) {
  const auto rep = ckn::validate_params(cfg.params);
  if (!rep.ok()) {
    std::string msg = "inadmissible parameters:";
    for (const auto& fnd : rep.findings)
      if (fnd.severity == ckn::Severity::fail) msg += " [" + fnd.name + "] " + fnd.detail;
    throw ckn::GeometryError(msg);
  }
}

ckn::AssemblyOptions make_opts(const Ctx& ctx) {
  ckn::AssemblyOptions opts;
  opts.threads = ctx.threads;
  return opts;
}

ckn::Nonlinearity make_nl(const ckn::ProblemParams& p) {
  return ckn::Nonlinearity::pure_power(p.kappa, p.q, p.theta);
}

std::string csv_path(const ckn::RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

// ---------------------------------------------------------------- commands

int cmd_mesh(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  require_admissible(cfg);
  ckn::Mesh mesh = ckn::mesh_for_level(cfg.radius, cfg.levels, cfg.effective_grading());
  ckn::validate_mesh(mesh);
  const ckn::MeshStatistics st = ckn::mesh_statistics(mesh);
  const std::string mesh_file = csv_path(cfg, "mesh.txt");
  ckn::write_mesh_file(mesh_file, mesh);

  json j = base_report("mesh", cfg);
  j["n_vertices"] = mesh.n_vertices();
  j["n_triangles"] = mesh.n_triangles();
  j["total_area"] = mesh.total_area();
  j["h_max"] = st.h_max;
  j["h_min"] = st.h_min;
  j["min_angle_deg"] = st.min_angle_deg;
  j["closest_vertex_distance"] = st.closest_vertex_distance;
  j["mesh_file"] = mesh_file;
  write_report(cfg, j);
  return 0;
}

ckn::SpectrumHierarchy solve_spectrum(const ckn::RunConfig& cfg, const Ctx& ctx) {
  return ckn::solve_spectrum_hierarchy(cfg, make_opts(ctx));
}

int cmd_eigen(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  require_admissible(cfg);
  ckn::SpectrumHierarchy sp = solve_spectrum(cfg, ctx);

  ckn::write_field_csv(csv_path(cfg, "e1.csv"), sp.pair1.func);
  ckn::write_field_csv(csv_path(cfg, "e2.csv"), sp.mu2.pair.func);

  json j = base_report("eigen", cfg);
  j["lambda1"] = sp.pair1.value;
  j["mu2"] = sp.mu2.pair.value;
  j["gap"] = sp.mu2.pair.value - sp.pair1.value;
  j["iters1"] = sp.pair1.iters;
  j["iters2"] = sp.mu2.pair.iters;
  j["residual1"] = sp.pair1.residual_norm;
  j["residual2"] = sp.mu2.pair.residual_norm;
  j["mesh_level"] = cfg.levels;
  j["lambda1_levels"] = sp.lambda1;
  j["lambda2_note"] = "lambda2 = mu2 (odd-loop)";
  write_report(cfg, j);
  return 0;
}

json critical_report(const std::string& command, const ckn::RunConfig& cfg,
                     const ckn::SolveReport& rep, double lambda1, double mu2,
                     const std::string& field_file) {
  json j = base_report(command, cfg);
  j["regime"] = rep.regime == ckn::Regime::mountain_pass ? "mountain_pass" : "linking";
  j["lambda"] = cfg.params.lambda;
  j["lambda1"] = lambda1;
  j["mu2"] = mu2;
  j["alpha"] = rep.alpha;
  j["beta"] = rep.beta;
  j["residual_dual"] = rep.residual_dual;
  j["sign_changes"] = rep.sign_changes;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["solution_file"] = field_file;
  return j;
}

int cmd_mp(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  require_admissible(cfg);
  ckn::SpectrumHierarchy sp = solve_spectrum(cfg, ctx);
  const double lambda1 = sp.pair1.value;
  if (!(cfg.params.lambda > 0.0) || !(cfg.params.lambda < lambda1))
    throw ckn::GeometryError("mountain pass requires 0 < lambda < lambda1 = " +
                             std::to_string(lambda1));

  const ckn::Nonlinearity nl = make_nl(cfg.params);
  ckn::Assembler& as = *sp.assembler;
  const ckn::FeFunction u1 = ckn::find_u1(as, sp.pair1, nl);
  const double scale = as.dnorm(u1);
  std::vector<double> rho_grid;
  for (int k = 1; k <= 12; ++k) rho_grid.push_back(scale * std::ldexp(1.0, -k));
  const ckn::MpGeometry geo = ckn::check_mp_geometry(as, nl, sp.pair1, rho_grid, 8,
                                                     ckn::derive_seed(cfg.seed, "mp"));
  ckn::SolveReport rep =
      ckn::mountain_pass(as, nl, u1, geo.alpha, 17, cfg.tol, cfg.max_iter);

  const std::string field = csv_path(cfg, "solution.csv");
  ckn::write_field_csv(field, rep.u);
  json j = critical_report("mp", cfg, rep, lambda1, sp.mu2.pair.value, field);
  j["mp_rho"] = geo.rho;
  write_report(cfg, j);
  return rep.converged ? 0 : 3;
}

int cmd_link(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  require_admissible(cfg);
  ckn::SpectrumHierarchy sp = solve_spectrum(cfg, ctx);
  const double lambda1 = sp.pair1.value;
  const double mu2 = sp.mu2.pair.value;
  if (!(cfg.params.lambda >= lambda1) || !(cfg.params.lambda < mu2))
    throw ckn::GeometryError("linking requires lambda1 <= lambda < lambda2 (mu2); lambda1 = " +
                             std::to_string(lambda1) + ", mu2 = " + std::to_string(mu2));

  const ckn::Nonlinearity nl = make_nl(cfg.params);
  ckn::Assembler& as = *sp.assembler;
  ckn::LinkingFrame frame = ckn::build_linking_frame(
      as, sp.pair1, sp.mu2.pair, /*r=*/4.0, /*rho=*/0.5, /*grid_density=*/4,
      ckn::derive_seed(cfg.seed, "link"));
  const ckn::LinkingGeometry geo = ckn::check_linking_geometry(frame, as, nl);
  ckn::SolveReport rep = ckn::linking_solve(frame, as, nl, geo.alpha, cfg.tol, cfg.max_iter);

  const std::string field = csv_path(cfg, "solution.csv");
  ckn::write_field_csv(field, rep.u);
  json j = critical_report("link", cfg, rep, lambda1, mu2, field);
  j["link_r"] = geo.r_final;
  j["link_rho"] = geo.rho_final;
  j["sup_boundary"] = geo.sup_boundary;
  j["escalations"] = geo.escalations;
  write_report(cfg, j);
  return rep.converged ? 0 : 3;
}

int cmd_ckn(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  require_admissible(cfg);
  const ckn::ProblemParams& p = cfg.params;
  const double r_exp = ctx.opt_r > 0.0 ? ctx.opt_r : p.p;
  const double alpha_exp = ctx.opt_alpha > -1e29 ? ctx.opt_alpha : (p.a + 1.0) * p.p - p.c;

  ckn::Mesh mesh = ckn::mesh_for_level(cfg.radius, cfg.levels, cfg.effective_grading());
  ckn::Assembler as(mesh, p, make_opts(ctx));
  const ckn::CknEstimate est =
      ckn::estimate_ckn_constant(as, r_exp, alpha_exp, cfg.tol, cfg.seed, cfg.max_iter);

  ckn::write_field_csv(csv_path(cfg, "maximizer.csv"), est.maximizer);
  json j = base_report("ckn", cfg);
  j["r"] = est.r_exp;
  j["alpha"] = est.alpha_exp;
  j["C_est"] = est.c_est;
  j["C_est_label"] = "discrete best constant (lower bound)";
  j["iterations"] = est.iters;
  write_report(cfg, j);
  return 0;
}

int cmd_tail(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  require_admissible(cfg);
  const ckn::ProblemParams& p = cfg.params;
  const double r_exp = ctx.opt_r > 0.0 ? ctx.opt_r : p.p;
  const double alpha_exp = ctx.opt_alpha > -1e29 ? ctx.opt_alpha : 0.5;

  ckn::Mesh mesh = ckn::mesh_for_level(cfg.radius, cfg.levels, cfg.effective_grading());
  ckn::Assembler as(mesh, p, make_opts(ctx));

  // smooth bounded samples: seeded low-order polynomial bumps vanishing on
  // the boundary
  auto rng = ckn::make_rng(cfg.seed, "tail-samples");
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<ckn::FeFunction> samples;
  const double R = mesh.radius;
  for (int s = 0; s < 4; ++s) {
    const double c0 = nd(rng), c1 = nd(rng), c2 = nd(rng);
    Eigen::VectorXd v(mesh.n_vertices());
    for (int i = 0; i < v.size(); ++i) {
      const double x = mesh.vertices[i][0], y = mesh.vertices[i][1];
      v[i] = (R * R - x * x - y * y) * (c0 + c1 * x + c2 * y);
    }
    samples.emplace_back(mesh, std::move(v));
  }

  std::vector<double> deltas;
  for (double f : {0.4, 0.2, 0.1, 0.05, 0.025}) deltas.push_back(f * R);
  const ckn::TailFit fit = ckn::tail_exponent_check(as, samples, r_exp, alpha_exp, deltas);

  {
    std::ofstream f(csv_path(cfg, "tail.csv"), std::ios::binary | std::ios::trunc);
    f.precision(17);
    f << "delta,mass\n";
    for (size_t i = 0; i < fit.deltas.size(); ++i)
      f << fit.deltas[i] << "," << fit.masses[i] << "\n";
  }
  json j = base_report("tail", cfg);
  j["r"] = r_exp;
  j["alpha"] = alpha_exp;
  j["fitted_slope"] = fit.fitted_slope;
  j["predicted_slope"] = fit.predicted_slope;
  j["rel_error"] = fit.rel_error;
  write_report(cfg, j);
  return 0;
}

int cmd_checkf(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  const ckn::ProblemParams& p = cfg.params;
  const ckn::Nonlinearity nl = make_nl(p);
  double p_star = std::numeric_limits<double>::infinity();
  try {
    p_star = ckn::critical_exponent(p.p, p.n, p.a, p.b);
  } catch (const std::domain_error&) {
    // p >= effective dimension: no finite critical exponent, (f1) is vacuous
  }
  const ckn::ConditionReport rep =
      ckn::check_f_conditions(nl, p.p, p_star, 200, ckn::derive_seed(cfg.seed, "checkf"));

  json j = base_report("checkf", cfg);
  j["p_star"] = std::isfinite(p_star) ? json(p_star) : json("inf");
  json conds = json::array();
  for (const auto& c : rep.conditions) {
    json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["detail"] = c.detail;
    if (c.witness) jc["witness"] = *c.witness;
    conds.push_back(jc);
  }
  j["conditions"] = conds;
  j["all_pass"] = rep.all_pass();
  write_report(cfg, j);
  if (!rep.all_pass()) {
    for (const auto& c : rep.conditions)
      if (!c.pass) std::cerr << "checkf: (" << c.name << ") fails: " << c.detail << "\n";
    return 2;
  }
  return 0;
}

int cmd_report(const Ctx& ctx) {
  ckn::RunConfig cfg = load_config(ctx);
  if (ctx.field_path.empty()) {
    std::cerr << "report: --field <solution.csv> is required\n";
    return 1;
  }
  ckn::Mesh mesh = ckn::mesh_for_level(cfg.radius, cfg.levels, cfg.effective_grading());
  ckn::FeFunction u(mesh, ckn::read_field_csv(ctx.field_path, mesh));
  ckn::Assembler as(mesh, cfg.params, make_opts(ctx));
  const ckn::Nonlinearity nl = make_nl(cfg.params);
  const ckn::SolutionReport rep = ckn::solution_report(as, u, nl);

  json j = base_report("report", cfg);
  j["field"] = ctx.field_path;
  j["I"] = rep.I;
  j["Phi"] = rep.Phi;
  j["J"] = rep.J;
  j["NF"] = rep.NF;
  j["residual_dual"] = rep.residual_dual;
  j["sign_changes"] = rep.sign_changes;
  j["max_abs"] = rep.max_abs;
  j["max_location"] = {rep.max_x, rep.max_y};
  write_report(cfg, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational critical points of the weighted p-Laplacian on a disk"};
  app.require_subcommand(1);

  Ctx ctx;
  int (*handler)(const Ctx&) = nullptr;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", ctx.config_path, "key = value config file");
    sub->add_option("--set", ctx.overrides, "override, key=value (repeatable)");
    sub->add_option("--threads", ctx.threads, "worker threads inside assembly")
        ->check(CLI::PositiveNumber);
    return sub;
  };

  add_common(app.add_subcommand("mesh", "build, validate and write the mesh"))
      ->callback([&] { handler = cmd_mesh; });
  add_common(app.add_subcommand("eigen", "lambda1 and mu2 by constrained minimax"))
      ->callback([&] { handler = cmd_eigen; });
  add_common(app.add_subcommand("mp", "mountain-pass critical point (0 < lambda < lambda1)"))
      ->callback([&] { handler = cmd_mp; });
  add_common(app.add_subcommand("link", "linking critical point (lambda1 <= lambda < lambda2)"))
      ->callback([&] { handler = cmd_link; });
  auto* sc_ckn = add_common(app.add_subcommand("ckn", "weighted-embedding constant estimate"));
  sc_ckn->add_option("--r", ctx.opt_r, "norm exponent r (default p)");
  sc_ckn->add_option("--alpha", ctx.opt_alpha, "weight exponent alpha (default (a+1)p-c)");
  sc_ckn->callback([&] { handler = cmd_ckn; });
  auto* sc_tail = add_common(app.add_subcommand("tail", "small-ball tail exponent check"));
  sc_tail->add_option("--r", ctx.opt_r, "norm exponent r (default p)");
  sc_tail->add_option("--alpha", ctx.opt_alpha, "weight exponent alpha (default 0.5)");
  sc_tail->callback([&] { handler = cmd_tail; });
  add_common(app.add_subcommand("checkf", "verify conditions (f1)-(f4)"))
      ->callback([&] { handler = cmd_checkf; });
  auto* sc_rep = add_common(app.add_subcommand("report", "evaluate a stored solution field"));
  sc_rep->add_option("--field", ctx.field_path, "solution field CSV");
  sc_rep->callback([&] { handler = cmd_report; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    return handler ? handler(ctx) : 1;
  } catch (const ckn::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << " (value " << e.value << ", residual "
              << e.residual << ", " << e.iterations << " iterations)\n";
    return 3;
  } catch (const ckn::GeometryError& e) {
    std::cerr << "geometry/admissibility failure: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "admissibility failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
