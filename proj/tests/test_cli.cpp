#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("CKN_CLI");
  REQUIRE_MESSAGE(p != nullptr, "CKN_CLI must point at the ckn-varcrit binary");
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path write_config(const fs::path& dir, const std::string& extra) {
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  std::ofstream out(cfg);
  out << "mode = validation\n"
         "p = 2.0\n"
         "a = 0.0\n"
         "b = 0.0\n"
         "c = 2.0\n"
         "q = 4.0\n"
         "theta = 4.0\n"
         "kappa = 1.0\n"
         "lambda = 0.0\n"
         "mesh.levels = 2\n"
         "solver.tol = 1e-6\n"
         "seed = 42\n"
      << "out_dir = " << (dir / "out").string() << "\n"
      << extra;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("") == 1);
  CHECK(run("eigen --config /nonexistent/path.cfg") == 1);
  CHECK(run("report") == 1);  // missing --field
}

TEST_CASE("mesh and eigen runs succeed and write report.json") {
  const fs::path dir = fs::temp_directory_path() / "ckn_cli_mesh";
  fs::remove_all(dir);
  const fs::path cfg = write_config(dir, "");
  CHECK(run("mesh --config " + cfg.string()) == 0);
  CHECK(fs::exists(dir / "out" / "report.json"));
  CHECK(run("eigen --config " + cfg.string()) == 0);
  const std::string rep = slurp(dir / "out" / "report.json");
  CHECK(rep.find("\"lambda1\"") != std::string::npos);
  CHECK(rep.find("\"mu2\"") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical reports") {
  const fs::path dir = fs::temp_directory_path() / "ckn_cli_seed";
  fs::remove_all(dir);
  const fs::path cfg = write_config(dir, "");
  REQUIRE(run("eigen --config " + cfg.string()) == 0);
  const std::string first = slurp(dir / "out" / "report.json");
  REQUIRE(run("eigen --config " + cfg.string() + " --threads 2") == 0);
  CHECK(first == slurp(dir / "out" / "report.json"));
}

TEST_CASE("admissibility failures exit with code 2") {
  const fs::path dir = fs::temp_directory_path() / "ckn_cli_adm";
  fs::remove_all(dir);
  // kappa = 0 kills superlinearity: checkf pinpoints a failing condition
  const fs::path cfg = write_config(dir, "");
  CHECK(run("checkf --config " + cfg.string() + " --set kappa=0") == 2);
  // mp outside its regime: lambda far above lambda1
  CHECK(run("mp --config " + cfg.string() + " --set lambda=50") == 2);
}

TEST_CASE("checkf passes for the default nonlinearity") {
  const fs::path dir = fs::temp_directory_path() / "ckn_cli_checkf";
  fs::remove_all(dir);
  const fs::path cfg = write_config(dir, "");
  CHECK(run("checkf --config " + cfg.string()) == 0);
  const std::string rep = slurp(dir / "out" / "report.json");
  CHECK(rep.find("\"all_pass\": true") != std::string::npos);
}
