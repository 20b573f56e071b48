#pragma once

#include <utility>
#include <vector>

#include "dakit/field.hpp"
#include "dakit/grid.hpp"
#include "dakit/roe.hpp"
#include "dakit/trajectory.hpp"

namespace dakit {

/// Both directional fluxes of one cell state (h, hu, hv).
std::pair<Cons3, Cons3> physical_flux_xy(const Cons3& state, double gravity);

/// State padded with one reflective ghost layer per wall: height mirrored,
/// wall-normal momentum negated, tangential momentum mirrored. Indices run
/// -1..nx and -1..ny (corner ghosts are mirrored twice and never read by the
/// dimensional sweeps).
struct GhostState {
  ScalarField h, hu, hv; // (nx+2) x (ny+2)
  int nx = 0, ny = 0;

  double& at(int c, int i, int j) { return (c == 0 ? h : (c == 1 ? hu : hv))(i + 1, j + 1); }
  double at(int c, int i, int j) const { return (c == 0 ? h : (c == 1 ? hu : hv))(i + 1, j + 1); }
};

GhostState apply_boundary(const StateField& s);

/// Largest stable explicit step: cfl * min(dx,dy) / max(|u|+c, |v|+c).
double stable_dt(const StateField& s, const GridSpec& grid, double cfl);

/// One Godunov step with dimensional splitting (x sweep with Roe fluxes,
/// then y sweep). Throws if dt violates the unit-CFL stability bound.
StateField step(const StateField& s, const GridSpec& grid, double dt);

struct IntegrateOptions {
  double cfl = 0.5;
  bool store_checkpoints = true;
};

/// Advance from t0 to tf, landing exactly on every record time. The returned
/// trajectory stores the states at the record times (t0 is always recorded)
/// and, when enabled, a checkpoint per substep for later linearization.
Trajectory integrate(const StateField& s0, const GridSpec& grid, double t0, double tf,
                     const std::vector<double>& record_times, const IntegrateOptions& opt = {});

/// Re-integrate a different initial state over the exact substep schedule of
/// a reference trajectory. Keeps the discrete model map fixed, which is what
/// gradient checks and outer-loop relinearizations differentiate.
Trajectory integrate_like(const Trajectory& reference, const StateField& s0);

namespace detail {
// one directional sweep of the splitting; step() is y_sweep(x_sweep(.))
StateField x_sweep(const StateField& s, const GridSpec& grid, double dt);
StateField y_sweep(const StateField& s, const GridSpec& grid, double dt);
} // namespace detail

} // namespace dakit
