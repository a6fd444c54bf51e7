#include "pitmesh/fem_laplace.hpp"
#include "pitmesh/mesh_adapt.hpp"
#include "pitmesh/triangulate.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace pitmesh;

namespace {

struct Setup {
  TriMesh mesh;
  std::vector<PitChain> chains;
};

// Default single pit at a fill spacing chosen by the benchmark argument
// (tenths of a micrometer).
Setup pit_mesh(std::int64_t h_tenths) {
  const geom::PitSpec pit{0.0, 10.0, 5.0, 61};
  Setup s;
  s.mesh = geom::build_domain_mesh({-20, 20, 20}, std::span<const geom::PitSpec>(&pit, 1),
                                   0.1 * static_cast<double>(h_tenths), 1);
  s.chains = chains_from_tags(s.mesh);
  return s;
}

void BM_Delaunay(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {u(rng), u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(geom::delaunay(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Delaunay)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_AssembleStiffness(benchmark::State& state) {
  const auto s = pit_mesh(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fem::assemble_stiffness(s.mesh));
  state.counters["cells"] = s.mesh.num_cells();
}
BENCHMARK(BM_AssembleStiffness)->Arg(15)->Arg(7)->Arg(4);

void BM_NewtonSolve(benchmark::State& state) {
  const auto s = pit_mesh(state.range(0));
  const fem::PitFluxModel model;
  const fem::NewtonSettings settings;
  fem::PhysicalState guess{Eigen::VectorXd::Zero(s.mesh.num_vertices())};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fem::newton_solve(s.mesh, s.chains, model, guess, settings));
  }
  state.counters["vertices"] = s.mesh.num_vertices();
}
BENCHMARK(BM_NewtonSolve)->Arg(15)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_EnergyAndGradient(benchmark::State& state) {
  const auto s = pit_mesh(state.range(0));
  const adapt::AdaptParams p;
  const auto metric = adapt::monitor_mackenzie(s.mesh, s.chains, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(adapt::energy(s.mesh, metric, p));
    benchmark::DoNotOptimize(adapt::grad_energy(s.mesh, metric, p));
  }
  state.counters["cells"] = s.mesh.num_cells();
}
BENCHMARK(BM_EnergyAndGradient)->Arg(15)->Arg(7);

void BM_MmpdeStep(benchmark::State& state) {
  const auto s = pit_mesh(state.range(0));
  const adapt::AdaptParams p;
  const auto monitor = adapt::mackenzie_monitor(s.mesh, s.chains, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(adapt::mmpde_step(s.mesh, s.chains, monitor, p, 0.5));
  }
}
BENCHMARK(BM_MmpdeStep)->Arg(15)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
