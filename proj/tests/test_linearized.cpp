#include <doctest.h>

#include <cmath>

#include "dakit/rng.hpp"
#include "dakit/swe.hpp"
#include "dakit/tlm_adjoint.hpp"

using namespace dakit;

namespace {

GridSpec grid(int nx = 6, int ny = 7) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 0.01;
  g.dy = 0.011;
  g.gravity = 9.81;
  return g;
}

StateField random_state(const GridSpec& g, SeededRng& rng) {
  StateField s(g);
  for (std::size_t k = 0; k < s.h.size(); ++k) {
    s.h[k] = 0.05 * (1.0 + 0.2 * rng.uniform());
    s.hu[k] = 1e-3 * rng.normal();
    s.hv[k] = 1e-3 * rng.normal();
  }
  return s;
}

Increment random_increment(const GridSpec& g, SeededRng& rng, double scale = 1.0) {
  Increment d(g);
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < d.comp(c).size(); ++k) d.comp(c)[k] = scale * rng.normal();
  return d;
}

} // namespace

TEST_CASE("Roe flux tangent matches central differences per interface") {
  SeededRng rng(21);
  const double g = 9.81;
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const Cons3 l = {0.04 + 0.02 * rng.uniform(), 1e-3 * rng.normal(), 1e-3 * rng.normal()};
    const Cons3 r = {0.04 + 0.02 * rng.uniform(), 1e-3 * rng.normal(), 1e-3 * rng.normal()};
    Cons3 dl, dr;
    for (int k = 0; k < 3; ++k) {
      dl[k] = 1e-3 * rng.normal();
      dr[k] = 1e-3 * rng.normal();
    }
    const Cons3 dflux = roe_flux_tangent(l, r, dl, dr, g);
    // central differences with an epsilon sweep, keeping the best agreement
    double best = 1e300;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
      Cons3 lp = l, lm = l, rp = r, rm = r;
      for (int k = 0; k < 3; ++k) {
        lp[k] += eps * dl[k];
        lm[k] -= eps * dl[k];
        rp[k] += eps * dr[k];
        rm[k] -= eps * dr[k];
      }
      const Cons3 fp = roe_flux(lp, rp, g);
      const Cons3 fm = roe_flux(lm, rm, g);
      double err = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double fd = (fp[k] - fm[k]) / (2.0 * eps);
        const double scale = std::max({1e-8, std::fabs(fd), std::fabs(dflux[k])});
        err = std::max(err, std::fabs(fd - dflux[k]) / scale);
      }
      best = std::min(best, err);
    }
    worst = std::max(worst, best);
  }
  CHECK(worst <= 5e-7);
}

TEST_CASE("Roe flux adjoint is the exact transpose of the tangent") {
  SeededRng rng(22);
  const double g = 9.81;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Cons3 l = {0.04 + 0.02 * rng.uniform(), 1e-3 * rng.normal(), 1e-3 * rng.normal()};
    const Cons3 r = {0.04 + 0.02 * rng.uniform(), 1e-3 * rng.normal(), 1e-3 * rng.normal()};
    Cons3 dl, dr, w;
    for (int k = 0; k < 3; ++k) {
      dl[k] = rng.normal();
      dr[k] = rng.normal();
      w[k] = rng.normal();
    }
    const Cons3 df = roe_flux_tangent(l, r, dl, dr, g);
    Cons3 lb = {0, 0, 0}, rb = {0, 0, 0};
    roe_flux_adjoint(l, r, w, g, lb, rb);
    double lhs = 0.0, rhs = 0.0;
    for (int k = 0; k < 3; ++k) {
      lhs += df[k] * w[k];
      rhs += dl[k] * lb[k] + dr[k] * rb[k];
    }
    worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1e-30, std::fabs(lhs)));
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("tlm_step is linear and vanishes on zero input") {
  const GridSpec g = grid();
  SeededRng rng(23);
  const StateField x = random_state(g, rng);
  const double dt = stable_dt(x, g, 0.5);

  const TangentState zero(g);
  const TangentState out = tlm_step(x, g, dt, zero);
  CHECK(norm2(out) == 0.0);

  const Increment d1 = random_increment(g, rng);
  const Increment d2 = random_increment(g, rng);
  const double a = 1.7, b = -0.3;
  Increment lin(g);
  axpy(a, d1, lin);
  axpy(b, d2, lin);
  const TangentState lhs = tlm_step(x, g, dt, lin);
  TangentState rhs = tlm_step(x, g, dt, d1);
  scale(rhs, a);
  axpy(b, tlm_step(x, g, dt, d2), rhs);
  axpy(-1.0, lhs, rhs);
  CHECK(norm2(rhs) <= 1e-13 * norm2(lhs));
}

TEST_CASE("Taylor test: tlm_step is the derivative of step") {
  const GridSpec g = grid();
  SeededRng rng(24);
  const StateField x = random_state(g, rng);
  const double dt = stable_dt(x, g, 0.5);
  Increment d = random_increment(g, rng);
  // scale so the largest component perturbs h by ~1e-3 m
  scale(d, 1e-3 / max_abs(d));
  const StateField fx = step(x, g, dt);
  const TangentState td = tlm_step(x, g, dt, d);

  double prev_ratio = 0.0;
  bool first = true;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    Increment de = d;
    scale(de, eps);
    const StateField fxe = step(x + de, g, dt);
    Increment err = fxe - fx;
    axpy(-eps, td, err);
    const double ratio = norm2(err) / (eps * eps);
    if (!first) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.3));
    prev_ratio = ratio;
    first = false;
  }
}

TEST_CASE("dot-product identity per substep") {
  const GridSpec g = grid(8, 9);
  SeededRng rng(25);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const StateField x = random_state(g, rng);
    const double dt = stable_dt(x, g, 0.5);
    const Increment d = random_increment(g, rng);
    const Increment y = random_increment(g, rng);
    const double lhs = dot(tlm_step(x, g, dt, d), y);
    const double rhs = dot(d, adjoint_step(x, g, dt, y));
    worst = std::max(worst, std::fabs(lhs - rhs) / std::fabs(lhs));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("sweeps: composition and dot-product identity over a window") {
  const GridSpec g = grid();
  SeededRng rng(26);
  const StateField x0 = random_state(g, rng);
  const Trajectory traj = integrate(x0, g, 0.0, 0.05, {0.025, 0.05});
  REQUIRE(traj.checkpoints.size() >= 4);

  const Increment zero(g);
  CHECK(norm2(tlm_sweep(traj, zero, 0.05)) == 0.0);

  const Increment d = random_increment(g, rng);
  const Increment y = random_increment(g, rng);
  const double lhs = dot(tlm_sweep(traj, d, 0.05), y);
  const AdjointState lam = adjoint_sweep(traj, {{0.05, y}});
  const double rhs = dot(d, lam);
  CHECK(std::fabs(lhs - rhs) / std::fabs(lhs) <= 1e-11);

  // additivity over sub-intervals: collect matches one-shot sweep
  const auto collected = tlm_sweep_collect(traj, d, {0.025, 0.05});
  const TangentState direct = tlm_sweep(traj, d, 0.025);
  Increment diff = collected[0];
  axpy(-1.0, direct, diff);
  CHECK(norm2(diff) == 0.0);
}

TEST_CASE("adjoint_sweep handles empty and initial-time forcings") {
  const GridSpec g = grid();
  SeededRng rng(27);
  const StateField x0 = random_state(g, rng);
  const Trajectory traj = integrate(x0, g, 0.0, 0.03, {0.03});

  CHECK(norm2(adjoint_sweep(traj, {})) == 0.0);

  const Increment f = random_increment(g, rng);
  const AdjointState lam = adjoint_sweep(traj, {{0.0, f}});
  Increment diff = lam;
  axpy(-1.0, f, diff);
  CHECK(norm2(diff) == 0.0);

  Increment f2 = random_increment(g, rng);
  CHECK_THROWS_AS(adjoint_sweep(traj, {{0.03, f}, {0.0, f2}}), std::invalid_argument);
}
