#include <benchmark/benchmark.h>

#include "dakit/harness.hpp"
#include "dakit/swe.hpp"

using namespace dakit;

namespace {

GridSpec tank_grid(int nx, int ny) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 0.10 / nx;
  g.dy = 0.25 / ny;
  g.gravity = 9.81;
  return g;
}

StateField case_a_state(const GridSpec& g) {
  CaseParams p;
  return build_case('A', g, p, 42).truth;
}

} // namespace

static void BM_ModelStep(benchmark::State& state) {
  const GridSpec g = tank_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) * 2);
  StateField x = case_a_state(g);
  const double dt = stable_dt(x, g, 0.5);
  for (auto _ : state) {
    x = step(x, g, dt);
    benchmark::DoNotOptimize(x.h.data());
  }
  state.SetItemsProcessed(state.iterations() * g.cells());
}
BENCHMARK(BM_ModelStep)->Arg(11)->Arg(22)->Arg(44);

static void BM_WindowIntegration(benchmark::State& state) {
  const GridSpec g = tank_grid(11, 26);
  const StateField x0 = case_a_state(g);
  for (auto _ : state) {
    Trajectory traj = integrate(x0, g, 0.0, 0.2, {0.05, 0.1, 0.15, 0.2}, {0.5, false});
    benchmark::DoNotOptimize(traj.states.back().h.data());
  }
}
BENCHMARK(BM_WindowIntegration);
