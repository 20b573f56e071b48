#include "dakit/swe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dakit {

std::pair<Cons3, Cons3> physical_flux_xy(const Cons3& state, double gravity) {
  const Cons3 f = physical_flux({state[0], state[1], state[2]}, gravity);
  const Cons3 gflux = physical_flux({state[0], state[2], state[1]}, gravity);
  // y flux in (h, hu, hv) order: (hv, huv, hv^2 + g h^2/2)
  return {f, {gflux[0], gflux[2], gflux[1]}};
}

GhostState apply_boundary(const StateField& s) {
  const int nx = s.nx(), ny = s.ny();
  GhostState g;
  g.nx = nx;
  g.ny = ny;
  g.h = ScalarField(nx + 2, ny + 2);
  g.hu = ScalarField(nx + 2, ny + 2);
  g.hv = ScalarField(nx + 2, ny + 2);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      g.at(0, i, j) = s.h(i, j);
      g.at(1, i, j) = s.hu(i, j);
      g.at(2, i, j) = s.hv(i, j);
    }
  // x walls: mirror h and hv, negate hu
  for (int j = 0; j < ny; ++j) {
    g.at(0, -1, j) = s.h(0, j);
    g.at(1, -1, j) = -s.hu(0, j);
    g.at(2, -1, j) = s.hv(0, j);
    g.at(0, nx, j) = s.h(nx - 1, j);
    g.at(1, nx, j) = -s.hu(nx - 1, j);
    g.at(2, nx, j) = s.hv(nx - 1, j);
  }
  // y walls: mirror h and hu, negate hv
  for (int i = 0; i < nx; ++i) {
    g.at(0, i, -1) = s.h(i, 0);
    g.at(1, i, -1) = s.hu(i, 0);
    g.at(2, i, -1) = -s.hv(i, 0);
    g.at(0, i, ny) = s.h(i, ny - 1);
    g.at(1, i, ny) = s.hu(i, ny - 1);
    g.at(2, i, ny) = -s.hv(i, ny - 1);
  }
  // corners (mirror across both walls); unused by the sweeps
  g.at(0, -1, -1) = s.h(0, 0);
  g.at(0, nx, -1) = s.h(nx - 1, 0);
  g.at(0, -1, ny) = s.h(0, ny - 1);
  g.at(0, nx, ny) = s.h(nx - 1, ny - 1);
  return g;
}

double stable_dt(const StateField& s, const GridSpec& grid, double cfl) {
  if (cfl <= 0.0 || cfl > 1.0) throw std::invalid_argument("stable_dt: cfl must be in (0, 1]");
  double smax = 0.0;
  for (std::size_t k = 0; k < s.h.size(); ++k) {
    const double h = s.h[k];
    if (h <= 0.0) throw std::domain_error("stable_dt: non-positive water height");
    const double c = std::sqrt(grid.gravity * h);
    const double su = std::fabs(s.hu[k] / h) + c;
    const double sv = std::fabs(s.hv[k] / h) + c;
    smax = std::max({smax, su, sv});
  }
  return cfl * std::min(grid.dx, grid.dy) / smax;
}

namespace detail {

StateField x_sweep(const StateField& s, const GridSpec& grid, double dt) {
  const int nx = s.nx(), ny = s.ny();
  const double nu = dt / grid.dx;
  const GhostState gs = apply_boundary(s);
  StateField out = s;
  std::vector<Cons3> flux(nx + 1);
  for (int j = 0; j < ny; ++j) {
    for (int k = 0; k <= nx; ++k) {
      const Cons3 l = {gs.at(0, k - 1, j), gs.at(1, k - 1, j), gs.at(2, k - 1, j)};
      const Cons3 r = {gs.at(0, k, j), gs.at(1, k, j), gs.at(2, k, j)};
      flux[k] = roe_flux(l, r, grid.gravity);
    }
    for (int i = 0; i < nx; ++i) {
      out.h(i, j) -= nu * (flux[i + 1][0] - flux[i][0]);
      out.hu(i, j) -= nu * (flux[i + 1][1] - flux[i][1]);
      out.hv(i, j) -= nu * (flux[i + 1][2] - flux[i][2]);
    }
  }
  return out;
}

StateField y_sweep(const StateField& s, const GridSpec& grid, double dt) {
  const int nx = s.nx(), ny = s.ny();
  const double nu = dt / grid.dy;
  const GhostState gs = apply_boundary(s);
  StateField out = s;
  std::vector<Cons3> flux(ny + 1);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k <= ny; ++k) {
      // normal momentum is hv, tangential is hu
      const Cons3 l = {gs.at(0, i, k - 1), gs.at(2, i, k - 1), gs.at(1, i, k - 1)};
      const Cons3 r = {gs.at(0, i, k), gs.at(2, i, k), gs.at(1, i, k)};
      flux[k] = roe_flux(l, r, grid.gravity);
    }
    for (int j = 0; j < ny; ++j) {
      out.h(i, j) -= nu * (flux[j + 1][0] - flux[j][0]);
      out.hv(i, j) -= nu * (flux[j + 1][1] - flux[j][1]);
      out.hu(i, j) -= nu * (flux[j + 1][2] - flux[j][2]);
    }
  }
  return out;
}

} // namespace detail

StateField step(const StateField& s, const GridSpec& grid, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("step: dt must be > 0");
  const double dt_max = stable_dt(s, grid, 1.0);
  if (dt > dt_max * (1.0 + 1e-9))
    throw std::runtime_error("step: CFL violation, dt exceeds the stable limit");
  return detail::y_sweep(detail::x_sweep(s, grid, dt), grid, dt);
}

Trajectory integrate(const StateField& s0, const GridSpec& grid, double t0, double tf,
                     const std::vector<double>& record_times, const IntegrateOptions& opt) {
  if (tf < t0) throw std::invalid_argument("integrate: tf must be >= t0");
  for (std::size_t i = 1; i < record_times.size(); ++i)
    if (record_times[i] <= record_times[i - 1])
      throw std::invalid_argument("integrate: record times must be strictly increasing");
  for (double t : record_times)
    if (t < t0 - 1e-12 || t > tf + 1e-12)
      throw std::invalid_argument("integrate: record time outside [t0, tf]");

  Trajectory traj;
  traj.grid = grid;

  // record instants; t0 is always first
  std::vector<double> marks;
  marks.push_back(t0);
  for (double t : record_times)
    if (t > t0 + 1e-12) marks.push_back(t);
  if (marks.back() < tf - 1e-12) marks.push_back(tf);

  StateField x = s0;
  double t = t0;
  traj.times.push_back(t0);
  traj.states.push_back(x);
  traj.steps_before.push_back(0);
  std::size_t nsteps = 0;

  for (std::size_t m = 1; m < marks.size(); ++m) {
    const double target = marks[m];
    while (t < target - 1e-12 * std::max(1.0, std::fabs(target))) {
      double dt = stable_dt(x, grid, opt.cfl);
      const double remaining = target - t;
      if (dt >= remaining * (1.0 - 1e-12)) dt = remaining;
      if (opt.store_checkpoints) traj.checkpoints.push_back({t, dt, x});
      x = step(x, grid, dt);
      t += dt;
      ++nsteps;
    }
    t = target; // absorb roundoff in the landing
    bool requested = false;
    for (double rt : record_times)
      if (std::fabs(rt - target) <= 1e-12) requested = true;
    if (requested || target == marks.back()) {
      traj.times.push_back(target);
      traj.states.push_back(x);
      traj.steps_before.push_back(nsteps);
    }
  }
  return traj;
}

Trajectory integrate_like(const Trajectory& reference, const StateField& s0) {
  if (!reference.has_checkpoints())
    throw std::invalid_argument("integrate_like: reference has no checkpoints");
  Trajectory traj;
  traj.grid = reference.grid;
  traj.times = reference.times;
  traj.steps_before = reference.steps_before;

  StateField x = s0;
  std::size_t next_record = 0;
  std::size_t nsteps = 0;
  auto record_if_due = [&]() {
    while (next_record < traj.times.size() && reference.steps_before[next_record] == nsteps) {
      traj.states.push_back(x);
      ++next_record;
    }
  };
  record_if_due();
  for (const StepCheckpoint& cp : reference.checkpoints) {
    traj.checkpoints.push_back({cp.t, cp.dt, x});
    x = step(x, reference.grid, cp.dt);
    ++nsteps;
    record_if_due();
  }
  if (traj.states.size() != traj.times.size())
    throw std::logic_error("integrate_like: record bookkeeping mismatch");
  return traj;
}

} // namespace dakit
