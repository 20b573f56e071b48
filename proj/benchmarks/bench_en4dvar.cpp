#include <benchmark/benchmark.h>

#include "dakit/en4dvar.hpp"
#include "dakit/harness.hpp"
#include "dakit/stochastics.hpp"
#include "dakit/swe.hpp"

using namespace dakit;

namespace {

struct EnFixture {
  GridSpec grid;
  Trajectory outer;
  std::vector<Trajectory> member_trajs;
  ObservationSet obs;
  LocalizationBasis basis;

  EnFixture() {
    grid.nx = 22;
    grid.ny = 52;
    grid.dx = 0.10 / grid.nx;
    grid.dy = 0.25 / grid.ny;
    grid.gravity = 9.81;
    CaseParams p;
    const TwinCase tc = build_case('A', grid, p, 12);
    const std::vector<double> times = {0.0, 0.05, 0.1, 0.15, 0.2};
    const Trajectory truth = integrate(tc.truth, grid, 0.0, 0.2, times, {0.5, false});
    obs = make_observations(truth, MaskKind::velocity, 0.0, 1e-3, 1e-3, 12);
    outer = integrate(tc.background, grid, 0.0, 0.2, times, {0.5, false});
    const Ensemble ens = make_ensemble_gauss(tc.background, grid, 8, 1.6e-6, 1e-6, 0.0125, 12);
    member_trajs = propagate_ensemble(ens, grid, 0.0, 0.2, times, 0.5, 4);
    basis = build_localization(grid, CorrelationKind::gaspari_cohn, 0.05, 0.99, 0);
  }
};

} // namespace

static void BM_EnsemblePropagation(benchmark::State& state) {
  static const EnFixture f;
  const Ensemble ens = [&] {
    Ensemble e;
    for (const auto& t : f.member_trajs) e.members.push_back(t.states.front());
    return e;
  }();
  const std::vector<double> times = {0.0, 0.1, 0.2};
  for (auto _ : state) {
    auto trajs = propagate_ensemble(ens, f.grid, 0.0, 0.2, times, 0.5, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(trajs.back().states.back().h.data());
  }
}
BENCHMARK(BM_EnsemblePropagation)->Arg(1)->Arg(4)->Arg(8)->UseRealTime();

static void BM_EnCostGradient(benchmark::State& state) {
  static const EnFixture f;
  const bool localized = state.range(0) != 0;
  EnProblem prob(f.outer, f.member_trajs, f.obs, localized ? &f.basis : nullptr);
  Eigen::VectorXd z = Eigen::VectorXd::Constant(prob.dim(), 0.1);
  for (auto _ : state) {
    auto [j, g] = prob.cost_grad(z);
    benchmark::DoNotOptimize(j);
    benchmark::DoNotOptimize(g.data());
  }
  state.counters["control_dim"] = prob.dim();
}
BENCHMARK(BM_EnCostGradient)->Arg(0)->Arg(1);

static void BM_BuildLocalization(benchmark::State& state) {
  static const EnFixture f;
  for (auto _ : state) {
    LocalizationBasis b = build_localization(f.grid, CorrelationKind::gaspari_cohn, 0.05, 0.99, 0);
    benchmark::DoNotOptimize(b.modes.data());
  }
}
BENCHMARK(BM_BuildLocalization);
