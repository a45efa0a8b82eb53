#include <benchmark/benchmark.h>

#include <cmath>

#include "smolu/dual.hpp"
#include "smolu/evolution.hpp"
#include "smolu/flux.hpp"

using namespace smolu;

namespace {

Profile bench_profile(std::size_t n) {
  const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
  return seed_profile(params, {1.0, 0.5}, LogGrid(1e-4, 1e4, n));
}

void BM_FluxNodes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Profile p = bench_profile(n);
  const FluxEvaluator flux(p.grid(), KernelSpec::classical(), {0.05, 0.01, 0.5}, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(flux.flux_nodes(p));
}
BENCHMARK(BM_FluxNodes)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PicardStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
  const Profile p = bench_profile(n);
  const Evolver ev(p.grid(), KernelSpec::classical(), {0.05, 0.01, 0.5}, params);
  const auto s = make_state(p, params, {0.05, 0.01, 0.5}, KernelSpec::classical());
  ev.picard_solve(s, 0.05);  // fills the operator cache
  for (auto _ : state) benchmark::DoNotOptimize(ev.picard_solve(s, 0.05));
}
BENCHMARK(BM_PicardStep)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DualAdvance(benchmark::State& state) {
  const DualGridOptions g{static_cast<std::size_t>(state.range(0)), 20.0};
  const JumpKernelSpec spec{{PowerLawTerm{1.0, 0.5}}};
  const DualSolution init = initial_solution(DeltaMollified{0.0, 0.01, 1}, g);
  const JumpSolver solver(spec, init.grid);
  for (auto _ : state) {
    DualSolution s = init;
    solver.advance(s, 0.1, 20);
    benchmark::DoNotOptimize(s.values.data());
  }
}
BENCHMARK(BM_DualAdvance)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
