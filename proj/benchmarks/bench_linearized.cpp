#include <benchmark/benchmark.h>

#include "dakit/harness.hpp"
#include "dakit/rng.hpp"
#include "dakit/swe.hpp"
#include "dakit/tlm_adjoint.hpp"

using namespace dakit;

namespace {

struct Fixture {
  GridSpec grid;
  Trajectory traj;
  Increment d;

  Fixture() {
    grid.nx = 11;
    grid.ny = 26;
    grid.dx = 0.10 / grid.nx;
    grid.dy = 0.25 / grid.ny;
    grid.gravity = 9.81;
    CaseParams p;
    traj = integrate(build_case('A', grid, p, 7).truth, grid, 0.0, 0.2, {0.2});
    d = Increment(grid);
    SeededRng rng(7, 1);
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < d.comp(c).size(); ++k) d.comp(c)[k] = rng.normal();
  }
};

} // namespace

static void BM_TlmWindowSweep(benchmark::State& state) {
  static const Fixture f;
  for (auto _ : state) {
    TangentState out = tlm_sweep(f.traj, f.d, 0.2);
    benchmark::DoNotOptimize(out.h.data());
  }
  state.counters["substeps"] = static_cast<double>(f.traj.checkpoints.size());
}
BENCHMARK(BM_TlmWindowSweep);

static void BM_AdjointWindowSweep(benchmark::State& state) {
  static const Fixture f;
  for (auto _ : state) {
    AdjointState out = adjoint_sweep(f.traj, {{0.2, f.d}});
    benchmark::DoNotOptimize(out.h.data());
  }
}
BENCHMARK(BM_AdjointWindowSweep);
