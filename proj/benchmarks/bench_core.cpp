#include <benchmark/benchmark.h>

#include <random>

#include "ckn/assembly.hpp"
#include "ckn/mesh.hpp"
#include "ckn/rng.hpp"

namespace {

ckn::ProblemParams paper_params() {
  ckn::ProblemParams prm;
  prm.mode = ckn::Mode::paper;
  prm.p = 1.5;
  prm.a = 0.2;
  prm.b = 0.2;
  prm.c = 0.5;
  prm.q = 3.0;
  prm.theta = 3.0;
  prm.lambda = 0.3;
  return prm;
}

ckn::FeFunction random_field(const ckn::Mesh& mesh) {
  auto rng = ckn::make_rng(42, "bench-fields");
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(mesh.n_vertices());
  for (int i = 0; i < v.size(); ++i) v[i] = nd(rng);
  return ckn::FeFunction(mesh, std::move(v));
}

void BM_MeshBuild(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ckn::Mesh mesh = ckn::mesh_for_level(1.0, level, 2.0);
    benchmark::DoNotOptimize(mesh.n_triangles());
  }
}
BENCHMARK(BM_MeshBuild)->Arg(3)->Arg(4)->Arg(5);

void BM_Phi(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  ckn::Mesh mesh = ckn::mesh_for_level(1.0, level, 2.0);
  ckn::Assembler as(mesh, paper_params());
  ckn::FeFunction u = random_field(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(as.phi(u));
}
BENCHMARK(BM_Phi)->Arg(3)->Arg(4)->Arg(5);

void BM_Residual(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  ckn::Mesh mesh = ckn::mesh_for_level(1.0, level, 2.0);
  ckn::Assembler as(mesh, paper_params());
  auto nl = ckn::Nonlinearity::pure_power(1.0, 3.0);
  ckn::FeFunction u = random_field(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(as.residual(u, nl).norm());
}
BENCHMARK(BM_Residual)->Arg(3)->Arg(4)->Arg(5);

void BM_PrecondSolve(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  ckn::Mesh mesh = ckn::mesh_for_level(1.0, level, 2.0);
  ckn::Assembler as(mesh, paper_params());
  ckn::FeFunction rhs = random_field(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(as.precond_solve(rhs.coeffs).norm());
}
BENCHMARK(BM_PrecondSolve)->Arg(3)->Arg(4)->Arg(5);

void BM_Hessian(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  ckn::Mesh mesh = ckn::mesh_for_level(1.0, level, 2.0);
  ckn::Assembler as(mesh, paper_params());
  auto nl = ckn::Nonlinearity::pure_power(1.0, 3.0);
  ckn::FeFunction u = random_field(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(as.hessian(u, nl).nonZeros());
}
BENCHMARK(BM_Hessian)->Arg(3)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
