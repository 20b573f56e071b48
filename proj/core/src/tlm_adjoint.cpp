#include "dakit/tlm_adjoint.hpp"

#include <cmath>
#include <stdexcept>

#include "dakit/roe.hpp"

namespace dakit {

namespace {

void check_grid(const StateField& a, const Increment& b) {
  if (a.nx() != b.nx() || a.ny() != b.ny())
    throw std::invalid_argument("tlm/adjoint: checkpoint and perturbation grids differ");
}

/// Ghost layer of a perturbation field; the reflection map is linear, so the
/// tangent ghosts follow the same mirror-and-negate rule as apply_boundary.
GhostState tangent_boundary(const Increment& d) {
  const int nx = d.nx(), ny = d.ny();
  GhostState g;
  g.nx = nx;
  g.ny = ny;
  g.h = ScalarField(nx + 2, ny + 2);
  g.hu = ScalarField(nx + 2, ny + 2);
  g.hv = ScalarField(nx + 2, ny + 2);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      g.at(0, i, j) = d.h(i, j);
      g.at(1, i, j) = d.hu(i, j);
      g.at(2, i, j) = d.hv(i, j);
    }
  for (int j = 0; j < ny; ++j) {
    g.at(0, -1, j) = d.h(0, j);
    g.at(1, -1, j) = -d.hu(0, j);
    g.at(2, -1, j) = d.hv(0, j);
    g.at(0, nx, j) = d.h(nx - 1, j);
    g.at(1, nx, j) = -d.hu(nx - 1, j);
    g.at(2, nx, j) = d.hv(nx - 1, j);
  }
  for (int i = 0; i < nx; ++i) {
    g.at(0, i, -1) = d.h(i, 0);
    g.at(1, i, -1) = d.hu(i, 0);
    g.at(2, i, -1) = -d.hv(i, 0);
    g.at(0, i, ny) = d.h(i, ny - 1);
    g.at(1, i, ny) = d.hu(i, ny - 1);
    g.at(2, i, ny) = -d.hv(i, ny - 1);
  }
  return g;
}

TangentState x_sweep_tlm(const StateField& s, const GridSpec& grid, double dt, const TangentState& d) {
  const int nx = s.nx(), ny = s.ny();
  const double nu = dt / grid.dx;
  const GhostState gs = apply_boundary(s);
  const GhostState gd = tangent_boundary(d);
  TangentState out = d;
  std::vector<Cons3> df(nx + 1);
  for (int j = 0; j < ny; ++j) {
    for (int k = 0; k <= nx; ++k) {
      const Cons3 l = {gs.at(0, k - 1, j), gs.at(1, k - 1, j), gs.at(2, k - 1, j)};
      const Cons3 r = {gs.at(0, k, j), gs.at(1, k, j), gs.at(2, k, j)};
      const Cons3 dl = {gd.at(0, k - 1, j), gd.at(1, k - 1, j), gd.at(2, k - 1, j)};
      const Cons3 dr = {gd.at(0, k, j), gd.at(1, k, j), gd.at(2, k, j)};
      df[k] = roe_flux_tangent(l, r, dl, dr, grid.gravity);
    }
    for (int i = 0; i < nx; ++i) {
      out.h(i, j) -= nu * (df[i + 1][0] - df[i][0]);
      out.hu(i, j) -= nu * (df[i + 1][1] - df[i][1]);
      out.hv(i, j) -= nu * (df[i + 1][2] - df[i][2]);
    }
  }
  return out;
}

TangentState y_sweep_tlm(const StateField& s, const GridSpec& grid, double dt, const TangentState& d) {
  const int nx = s.nx(), ny = s.ny();
  const double nu = dt / grid.dy;
  const GhostState gs = apply_boundary(s);
  const GhostState gd = tangent_boundary(d);
  TangentState out = d;
  std::vector<Cons3> df(ny + 1);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k <= ny; ++k) {
      const Cons3 l = {gs.at(0, i, k - 1), gs.at(2, i, k - 1), gs.at(1, i, k - 1)};
      const Cons3 r = {gs.at(0, i, k), gs.at(2, i, k), gs.at(1, i, k)};
      const Cons3 dl = {gd.at(0, i, k - 1), gd.at(2, i, k - 1), gd.at(1, i, k - 1)};
      const Cons3 dr = {gd.at(0, i, k), gd.at(2, i, k), gd.at(1, i, k)};
      df[k] = roe_flux_tangent(l, r, dl, dr, grid.gravity);
    }
    for (int j = 0; j < ny; ++j) {
      out.h(i, j) -= nu * (df[j + 1][0] - df[j][0]);
      out.hv(i, j) -= nu * (df[j + 1][1] - df[j][1]);
      out.hu(i, j) -= nu * (df[j + 1][2] - df[j][2]);
    }
  }
  return out;
}

/// Transpose of x_sweep_tlm at the same checkpoint.
AdjointState x_sweep_adj(const StateField& s, const GridSpec& grid, double dt, const AdjointState& lam) {
  const int nx = s.nx(), ny = s.ny();
  const double nu = dt / grid.dx;
  const GhostState gs = apply_boundary(s);
  // adjoint accumulators over the ghost-extended layout
  GhostState ext;
  ext.nx = nx;
  ext.ny = ny;
  ext.h = ScalarField(nx + 2, ny + 2);
  ext.hu = ScalarField(nx + 2, ny + 2);
  ext.hv = ScalarField(nx + 2, ny + 2);

  for (int j = 0; j < ny; ++j) {
    for (int k = 0; k <= nx; ++k) {
      Cons3 mu = {0, 0, 0};
      if (k < nx) {
        mu[0] += nu * lam.h(k, j);
        mu[1] += nu * lam.hu(k, j);
        mu[2] += nu * lam.hv(k, j);
      }
      if (k > 0) {
        mu[0] -= nu * lam.h(k - 1, j);
        mu[1] -= nu * lam.hu(k - 1, j);
        mu[2] -= nu * lam.hv(k - 1, j);
      }
      const Cons3 l = {gs.at(0, k - 1, j), gs.at(1, k - 1, j), gs.at(2, k - 1, j)};
      const Cons3 r = {gs.at(0, k, j), gs.at(1, k, j), gs.at(2, k, j)};
      Cons3 lb = {0, 0, 0}, rb = {0, 0, 0};
      roe_flux_adjoint(l, r, mu, grid.gravity, lb, rb);
      for (int c = 0; c < 3; ++c) {
        ext.at(c, k - 1, j) += lb[c];
        ext.at(c, k, j) += rb[c];
      }
    }
  }

  AdjointState out = lam; // identity part of the update
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      out.h(i, j) += ext.at(0, i, j);
      out.hu(i, j) += ext.at(1, i, j);
      out.hv(i, j) += ext.at(2, i, j);
    }
    // fold ghost adjoints back with the mirror signs
    out.h(0, j) += ext.at(0, -1, j);
    out.hu(0, j) -= ext.at(1, -1, j);
    out.hv(0, j) += ext.at(2, -1, j);
    out.h(nx - 1, j) += ext.at(0, nx, j);
    out.hu(nx - 1, j) -= ext.at(1, nx, j);
    out.hv(nx - 1, j) += ext.at(2, nx, j);
  }
  return out;
}

AdjointState y_sweep_adj(const StateField& s, const GridSpec& grid, double dt, const AdjointState& lam) {
  const int nx = s.nx(), ny = s.ny();
  const double nu = dt / grid.dy;
  const GhostState gs = apply_boundary(s);
  GhostState ext;
  ext.nx = nx;
  ext.ny = ny;
  ext.h = ScalarField(nx + 2, ny + 2);
  ext.hu = ScalarField(nx + 2, ny + 2);
  ext.hv = ScalarField(nx + 2, ny + 2);

  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k <= ny; ++k) {
      // flux order in the y sweep is (h, hv, hu)
      Cons3 mu = {0, 0, 0};
      if (k < ny) {
        mu[0] += nu * lam.h(i, k);
        mu[1] += nu * lam.hv(i, k);
        mu[2] += nu * lam.hu(i, k);
      }
      if (k > 0) {
        mu[0] -= nu * lam.h(i, k - 1);
        mu[1] -= nu * lam.hv(i, k - 1);
        mu[2] -= nu * lam.hu(i, k - 1);
      }
      const Cons3 l = {gs.at(0, i, k - 1), gs.at(2, i, k - 1), gs.at(1, i, k - 1)};
      const Cons3 r = {gs.at(0, i, k), gs.at(2, i, k), gs.at(1, i, k)};
      Cons3 lb = {0, 0, 0}, rb = {0, 0, 0};
      roe_flux_adjoint(l, r, mu, grid.gravity, lb, rb);
      // lb/rb are in (h, hv, hu) order; scatter back accordingly
      ext.at(0, i, k - 1) += lb[0];
      ext.at(2, i, k - 1) += lb[1];
      ext.at(1, i, k - 1) += lb[2];
      ext.at(0, i, k) += rb[0];
      ext.at(2, i, k) += rb[1];
      ext.at(1, i, k) += rb[2];
    }
  }

  AdjointState out = lam;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      out.h(i, j) += ext.at(0, i, j);
      out.hu(i, j) += ext.at(1, i, j);
      out.hv(i, j) += ext.at(2, i, j);
    }
    out.h(i, 0) += ext.at(0, i, -1);
    out.hu(i, 0) += ext.at(1, i, -1);
    out.hv(i, 0) -= ext.at(2, i, -1);
    out.h(i, ny - 1) += ext.at(0, i, ny);
    out.hu(i, ny - 1) += ext.at(1, i, ny);
    out.hv(i, ny - 1) -= ext.at(2, i, ny);
  }
  return out;
}

} // namespace

TangentState tlm_step(const StateField& checkpoint, const GridSpec& grid, double dt, const TangentState& d) {
  check_grid(checkpoint, d);
  const StateField mid = detail::x_sweep(checkpoint, grid, dt);
  return y_sweep_tlm(mid, grid, dt, x_sweep_tlm(checkpoint, grid, dt, d));
}

AdjointState adjoint_step(const StateField& checkpoint, const GridSpec& grid, double dt,
                          const AdjointState& lambda) {
  check_grid(checkpoint, lambda);
  const StateField mid = detail::x_sweep(checkpoint, grid, dt);
  return x_sweep_adj(checkpoint, grid, dt, y_sweep_adj(mid, grid, dt, lambda));
}

TangentState tlm_sweep(const Trajectory& traj, const TangentState& d0, double t) {
  const std::size_t m = traj.index_of_time(t);
  const std::size_t nsteps = traj.steps_before[m];
  TangentState d = d0;
  for (std::size_t k = 0; k < nsteps; ++k)
    d = tlm_step(traj.checkpoints[k].state, traj.grid, traj.checkpoints[k].dt, d);
  return d;
}

std::vector<TangentState> tlm_sweep_collect(const Trajectory& traj, const TangentState& d0,
                                            const std::vector<double>& times) {
  std::vector<std::size_t> marks;
  marks.reserve(times.size());
  for (double t : times) marks.push_back(traj.steps_before[traj.index_of_time(t)]);
  for (std::size_t i = 1; i < marks.size(); ++i)
    if (marks[i] < marks[i - 1]) throw std::invalid_argument("tlm_sweep_collect: times must be non-decreasing");

  std::vector<TangentState> out;
  out.reserve(times.size());
  TangentState d = d0;
  std::size_t k = 0;
  for (std::size_t m = 0; m < marks.size(); ++m) {
    for (; k < marks[m]; ++k)
      d = tlm_step(traj.checkpoints[k].state, traj.grid, traj.checkpoints[k].dt, d);
    out.push_back(d);
  }
  return out;
}

AdjointState adjoint_sweep(const Trajectory& traj, const std::vector<std::pair<double, AdjointState>>& forcings) {
  AdjointState lam(traj.grid);
  if (forcings.empty()) return lam;

  std::vector<std::pair<std::size_t, const AdjointState*>> marks;
  marks.reserve(forcings.size());
  for (const auto& [t, f] : forcings) marks.push_back({traj.steps_before[traj.index_of_time(t)], &f});
  for (std::size_t i = 1; i < marks.size(); ++i)
    if (marks[i].first < marks[i - 1].first)
      throw std::invalid_argument("adjoint_sweep: forcing times must be non-decreasing");

  std::size_t next = marks.size();
  std::size_t s = marks.back().first;
  // inject forcings at the terminal position, then march backward
  while (next > 0 && marks[next - 1].first == s) {
    axpy(1.0, *marks[next - 1].second, lam);
    --next;
  }
  while (s > 0) {
    --s;
    lam = adjoint_step(traj.checkpoints[s].state, traj.grid, traj.checkpoints[s].dt, lam);
    while (next > 0 && marks[next - 1].first == s) {
      axpy(1.0, *marks[next - 1].second, lam);
      --next;
    }
  }
  return lam;
}

} // namespace dakit
