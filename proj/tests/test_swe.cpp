#include <doctest.h>

#include <cmath>

#include "dakit/rng.hpp"
#include "dakit/swe.hpp"

using namespace dakit;

namespace {

GridSpec small_grid(int nx = 5, int ny = 6, double dx = 0.01, double dy = 0.01) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.dx = dx;
  g.dy = dy;
  g.gravity = 9.81;
  return g;
}

StateField lake_at_rest(const GridSpec& g, double depth = 1.0) {
  StateField s(g);
  s.h.fill(depth);
  return s;
}

StateField random_state(const GridSpec& g, SeededRng& rng, double depth = 0.05) {
  StateField s(g);
  for (std::size_t k = 0; k < s.h.size(); ++k) {
    s.h[k] = depth * (1.0 + 0.2 * rng.uniform());
    s.hu[k] = 0.02 * depth * rng.normal();
    s.hv[k] = 0.02 * depth * rng.normal();
  }
  return s;
}

StateField mirror_x(const StateField& s) {
  StateField m(s.nx(), s.ny());
  for (int j = 0; j < s.ny(); ++j)
    for (int i = 0; i < s.nx(); ++i) {
      const int ii = s.nx() - 1 - i;
      m.h(i, j) = s.h(ii, j);
      m.hu(i, j) = -s.hu(ii, j);
      m.hv(i, j) = s.hv(ii, j);
    }
  return m;
}

} // namespace

TEST_CASE("physical flux matches the closed forms") {
  auto [f, g] = physical_flux_xy({1.0, 0.0, 0.0}, 9.81);
  CHECK(f[0] == doctest::Approx(0.0));
  CHECK(f[1] == doctest::Approx(4.905));
  CHECK(f[2] == doctest::Approx(0.0));
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(0.0));
  CHECK(g[2] == doctest::Approx(4.905));

  auto [f2, g2] = physical_flux_xy({2.0, 0.0, 0.0}, 9.81);
  CHECK(f2[1] == doctest::Approx(19.62));
  (void)g2;

  // zero velocity: zero mass flux for any height
  for (double h : {0.3, 1.7, 42.0}) {
    auto [fa, ga] = physical_flux_xy({h, 0.0, 0.0}, 9.81);
    CHECK(fa[0] == 0.0);
    CHECK(ga[0] == 0.0);
  }
  CHECK_THROWS_AS(physical_flux({0.0, 1.0, 0.0}, 9.81), std::domain_error);
}

TEST_CASE("Roe flux is consistent and symmetric at rest") {
  SeededRng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Cons3 x = {0.02 + rng.uniform(), 0.1 * rng.normal(), 0.1 * rng.normal()};
    const Cons3 fstar = roe_flux(x, x, 9.81);
    const Cons3 f = physical_flux(x, 9.81);
    for (int k = 0; k < 3; ++k) CHECK(fstar[k] == f[k]); // exact, zero jump
  }
  const Cons3 rest = roe_flux({1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 9.81);
  CHECK(rest[0] == doctest::Approx(0.0));
  CHECK(rest[1] == doctest::Approx(4.905));
  CHECK(rest[2] == doctest::Approx(0.0));
  CHECK_THROWS_AS(roe_flux({1.0, 0, 0}, {-1.0, 0, 0}, 9.81), std::domain_error);
}

TEST_CASE("Roe flux satisfies the flux-difference property") {
  // the linearization is exact: F(R) - F(L) = sum of c_i a_i r_i, so
  // F*(L,R) + F*(R,L computed with reversed upwinding) ... check directly:
  // F(R) - F(L) equals the jump recovered from the dissipation terms with
  // signed (not absolute) wave speeds. Verified here via the identity
  //   F*(L,R) = 1/2 (F(L)+F(R)) - 1/2 sum |c_i| a_i r_i
  // by comparing the upwind flux against a one-sided evaluation for a
  // supersonic configuration where upwinding must return F(L) exactly.
  const double g = 9.81;
  const Cons3 l = {1.0, 4.0, 0.3}; // u = 4 > c = sqrt(g*h) ~ 3.13
  const Cons3 r = {1.05, 4.2, 0.2};
  const Cons3 fl = physical_flux(l, g);
  const Cons3 fstar = roe_flux(l, r, g);
  for (int k = 0; k < 3; ++k) CHECK(fstar[k] == doctest::Approx(fl[k]).epsilon(1e-12));
}

TEST_CASE("reflective ghosts mirror height and negate normal momentum") {
  const GridSpec g = small_grid();
  SeededRng rng(3);
  StateField s = random_state(g, rng, 1.0);
  s.hu(0, 2) = 2.0;
  s.hv(0, 2) = 0.0;
  s.h(0, 2) = 1.0;
  const GhostState gs = apply_boundary(s);
  CHECK(gs.at(0, -1, 2) == 1.0);
  CHECK(gs.at(1, -1, 2) == -2.0);
  CHECK(gs.at(2, -1, 2) == 0.0);
  // lake at rest: ghosts equal adjacent interior cells up to momentum sign
  const StateField rest = lake_at_rest(g);
  const GhostState gr = apply_boundary(rest);
  for (int j = 0; j < g.ny; ++j) {
    CHECK(gr.at(0, -1, j) == rest.h(0, j));
    CHECK(gr.at(1, -1, j) == -rest.hu(0, j));
  }
  // ghosts are not interior: total interior mass untouched
  CHECK(total_mass(s, g) == total_mass(s, g));
}

TEST_CASE("stable_dt follows the wave-speed formula") {
  const GridSpec g = small_grid();
  const StateField rest = lake_at_rest(g, 1.0);
  CHECK(stable_dt(rest, g, 0.5) == doctest::Approx(0.5 * 0.01 / std::sqrt(9.81)).epsilon(1e-12));
  CHECK(stable_dt(rest, g, 1.0) == doctest::Approx(2.0 * stable_dt(rest, g, 0.5)).epsilon(1e-12));

  // uniform velocity u = sqrt(g h) halves dt relative to rest
  StateField moving = rest;
  const double c = std::sqrt(9.81);
  for (std::size_t k = 0; k < moving.h.size(); ++k) moving.hu[k] = c * moving.h[k];
  CHECK(stable_dt(moving, g, 0.5) == doctest::Approx(0.5 * stable_dt(rest, g, 0.5)).epsilon(1e-12));
}

TEST_CASE("lake at rest is a fixed point of step") {
  const GridSpec g = small_grid(7, 9);
  const StateField rest = lake_at_rest(g, 0.05);
  const double dt = stable_dt(rest, g, 0.5);
  const StateField next = step(rest, g, dt);
  for (std::size_t k = 0; k < rest.h.size(); ++k) {
    CHECK(next.h[k] == rest.h[k]);
    CHECK(next.hu[k] == 0.0);
    CHECK(next.hv[k] == 0.0);
  }
}

TEST_CASE("step conserves mass and rejects CFL violations") {
  const GridSpec g = small_grid(8, 12);
  SeededRng rng(11);
  StateField s = random_state(g, rng);
  const double m0 = total_mass(s, g);
  for (int n = 0; n < 50; ++n) s = step(s, g, stable_dt(s, g, 0.5));
  CHECK(std::fabs(total_mass(s, g) - m0) / m0 <= 1e-12);
  CHECK_THROWS_AS(step(s, g, 100.0 * stable_dt(s, g, 1.0)), std::runtime_error);
}

TEST_CASE("sloshing tank conserves mass over 1000 steps") {
  GridSpec g = small_grid(11, 13, 0.01, 0.012);
  StateField s(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) s.h(i, j) = 0.05 + 0.2 * (g.xc(i) - 0.5 * g.length_x());
  const double m0 = total_mass(s, g);
  for (int n = 0; n < 1000; ++n) s = step(s, g, stable_dt(s, g, 0.5));
  CHECK(std::fabs(total_mass(s, g) - m0) / m0 <= 1e-10);
  // the wave actually moved
  double hu_norm = 0.0;
  for (std::size_t k = 0; k < s.hu.size(); ++k) hu_norm += std::fabs(s.hu[k]);
  CHECK(hu_norm > 0.0);
}

TEST_CASE("integrate lands on record times and is a semigroup") {
  const GridSpec g = small_grid();
  SeededRng rng(5);
  const StateField s0 = random_state(g, rng);

  const Trajectory t_empty = integrate(s0, g, 0.3, 0.3, {});
  CHECK(t_empty.times.size() == 1);
  CHECK(t_empty.states[0].h[0] == s0.h[0]);

  const Trajectory full = integrate(s0, g, 0.0, 0.08, {0.04, 0.08});
  const Trajectory half = integrate(s0, g, 0.0, 0.04, {0.04});
  const Trajectory rest = integrate(half.states.back(), g, 0.04, 0.08, {0.08});
  const StateField& a = full.states.back();
  const StateField& b = rest.states.back();
  for (std::size_t k = 0; k < a.h.size(); ++k) {
    CHECK(a.h[k] == b.h[k]);
    CHECK(a.hu[k] == b.hu[k]);
    CHECK(a.hv[k] == b.hv[k]);
  }
  CHECK(full.checkpoints.size() == full.steps_before.back());

  // window of 0.2 s with 5 record times
  const Trajectory window = integrate(s0, g, 0.0, 0.2, {0.0, 0.05, 0.1, 0.15, 0.2});
  CHECK(window.times.size() == 5);
  CHECK(window.times.front() == 0.0);
  CHECK(window.times.back() == 0.2);
}

TEST_CASE("integrate_like reproduces the schedule bit-exactly") {
  const GridSpec g = small_grid();
  SeededRng rng(9);
  const StateField s0 = random_state(g, rng);
  const Trajectory ref = integrate(s0, g, 0.0, 0.05, {0.025, 0.05});
  const Trajectory replay = integrate_like(ref, s0);
  REQUIRE(replay.states.size() == ref.states.size());
  for (std::size_t m = 0; m < ref.states.size(); ++m)
    for (std::size_t k = 0; k < ref.states[m].h.size(); ++k)
      CHECK(replay.states[m].h[k] == ref.states[m].h[k]);
}

TEST_CASE("mirroring across the x mid-axis commutes with step") {
  const GridSpec g = small_grid(6, 5);
  SeededRng rng(13);
  const StateField s = random_state(g, rng);
  const double dt = stable_dt(s, g, 0.5);
  const StateField a = mirror_x(step(s, g, dt));
  const StateField b = step(mirror_x(s), g, dt);
  for (std::size_t k = 0; k < a.h.size(); ++k) {
    CHECK(a.h[k] == doctest::Approx(b.h[k]).epsilon(1e-13));
    CHECK(a.hu[k] == doctest::Approx(b.hu[k]).epsilon(1e-13));
    CHECK(a.hv[k] == doctest::Approx(b.hv[k]).epsilon(1e-13));
  }
}
