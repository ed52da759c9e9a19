#include <benchmark/benchmark.h>

#include "hpdpg/anisotropy.hpp"
#include "hpdpg/hp_model.hpp"
#include "hpdpg/problems.hpp"
#include "hpdpg/remesh.hpp"

using namespace hpdpg;

namespace {

void BM_AssembleLocal(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto spec = make_problem("boundary_layer");
  HpMesh hp(make_unit_square(2), p);
  const auto layout = build_layout(hp, 2);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_local(hp.mesh, 3, spec.pde, layout));
}
BENCHMARK(BM_AssembleLocal)->DenseRange(1, 8, 1);

void BM_SolveGlobal(benchmark::State& state) {
  const auto spec = make_problem("boundary_layer");
  HpMesh hp(make_unit_square(static_cast<int>(state.range(0))), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_global(hp, spec.pde, {}));
  state.counters["elements"] = hp.num_elements();
}
BENCHMARK(BM_SolveGlobal)->Args({8, 2})->Args({8, 4})->Args({16, 2})->Unit(benchmark::kMillisecond);

void BM_EstimateErrors(benchmark::State& state) {
  const auto spec = make_problem("boundary_layer");
  auto sol = solve_global(HpMesh(make_unit_square(8), 3), spec.pde, {});
  for (auto _ : state) estimate_errors(sol);
}
BENCHMARK(BM_EstimateErrors)->Unit(benchmark::kMillisecond);

void BM_PatchSolve(benchmark::State& state) {
  const auto spec = make_problem("boundary_layer");
  HpMesh hp(make_unit_square(6), 3);
  const auto sol = solve_global(hp, spec.pde, {});
  const Patch patch = build_patch(hp, 25);
  const int q = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_patch_at_order(sol, patch, q, {}));
}
BENCHMARK(BM_PatchSolve)->Arg(2)->Arg(3)->Arg(4);

void BM_AnisotropySearch(benchmark::State& state) {
  LocalErrorModel q;
  const int n = static_cast<int>(state.range(0));
  Poly2 f{n, std::vector<double>(static_cast<std::size_t>(Poly2::size(n)), 0.0)};
  f.coeffs[static_cast<std::size_t>(Poly2::index(n, 0))] = 1.0;
  f.coeffs[static_cast<std::size_t>(Poly2::index(n - 1, 1))] = 0.4;
  q.components.push_back(f);
  for (auto _ : state) benchmark::DoNotOptimize(optimize_anisotropy(q));
}
BENCHMARK(BM_AnisotropySearch)->Arg(2)->Arg(5);

void BM_Remesh(benchmark::State& state) {
  const Triangulation mesh = make_unit_square(8);
  const MetricTensor m = metric_compose({0.3, 4.0, static_cast<double>(state.range(0))});
  const std::vector<MetricTensor> vm(static_cast<std::size_t>(mesh.num_vertices()), m);
  for (auto _ : state) benchmark::DoNotOptimize(remesh_internal(mesh, vm));
}
BENCHMARK(BM_Remesh)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
