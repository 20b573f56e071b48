#include "dakit/en4dvar.hpp"

#include <cmath>
#include <stdexcept>

#include "dakit/optim.hpp"
#include "dakit/rng.hpp"
#include "dakit/swe.hpp"

namespace dakit {

namespace {

ObservationSet slice_observations(const ObservationSet& all, const std::vector<std::size_t>& idx) {
  ObservationSet out;
  out.mask = all.mask;
  out.variance = all.variance;
  out.times.reserve(idx.size());
  out.values.reserve(idx.size());
  for (std::size_t k : idx) {
    if (k >= all.times.size()) throw std::invalid_argument("run_en4dvar_cycle: observation index out of range");
    out.times.push_back(all.times[k]);
    out.values.push_back(all.values[k]);
  }
  out.validate();
  return out;
}

void shift_members(Ensemble& ens, const Increment& dx) {
  for (StateField& m : ens.members) add_in_place(m, dx);
}

/// translate the ensemble so its mean equals `target`, preserving anomalies
void recenter(Ensemble& ens, const StateField& target) {
  const StateField mean = ens.mean();
  for (StateField& m : ens.members)
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < m.comp(c).size(); ++k)
        m.comp(c)[k] += target.comp(c)[k] - mean.comp(c)[k];
}

} // namespace

En4dvarResult run_en4dvar_cycle(const GridSpec& grid, const StateField& background, const Ensemble& init_ens,
                                const ObservationSet& all_obs, const std::vector<En4dvarWindow>& windows,
                                const En4dvarOptions& opt) {
  init_ens.validate();
  all_obs.validate();
  if (windows.empty()) throw std::invalid_argument("run_en4dvar_cycle: no windows");
  for (std::size_t w = 1; w < windows.size(); ++w)
    if (windows[w].t0 < windows[w - 1].t0)
      throw std::invalid_argument("run_en4dvar_cycle: windows must be ordered");

  En4dvarResult res;
  LocalizationBasis basis;
  const LocalizationBasis* loc = nullptr;
  if (opt.localization) {
    basis = build_localization(grid, opt.loc_kind, opt.loc_cutoff, opt.loc_energy, opt.loc_modes);
    loc = &basis;
    res.loc_rank = basis.rank;
    res.loc_energy = basis.energy_kept;
  }

  StateField x = background;
  Ensemble ens = init_ens;

  for (std::size_t w = 0; w < windows.size(); ++w) {
    const En4dvarWindow& win = windows[w];
    const ObservationSet obs = slice_observations(all_obs, win.obs_indices);
    if (!obs.times.empty() && std::fabs(obs.times.front() - win.t0) > 1e-9)
      throw std::invalid_argument("run_en4dvar_cycle: first window observation must sit at the window start");

    double previous_cost = 0.0;
    StateField x_prev = x;
    Ensemble ens_prev = ens;
    for (int outer = 0; outer < opt.outer_iters; ++outer) {
      const Trajectory outer_traj =
          integrate(x, grid, win.t0, win.tf, obs.times, {opt.cfl, /*store_checkpoints=*/false});
      const auto member_trajs = propagate_ensemble(ens, grid, win.t0, win.tf, obs.times, opt.cfl, opt.threads);
      EnProblem prob(outer_traj, member_trajs, obs, loc);

      CostReport rep;
      rep.observation = prob.innovation_cost();
      rep.total = rep.observation; // zero increment: no background part yet
      if (outer > 0 && rep.observation > previous_cost * (1.0 + 1e-12)) {
        // the last increment made things worse: revert and stop this window
        x = x_prev;
        ens = ens_prev;
        res.converged = false;
        res.message = "outer iteration increased the innovation cost; reverted";
        res.reports.push_back(rep);
        break;
      }
      previous_cost = rep.observation;
      x_prev = x;
      ens_prev = ens;

      const Eigen::VectorXd b = prob.rhs();
      rep.grad_norm = b.norm();
      const CgResult cg = conjugate_gradient([&](const Eigen::VectorXd& v) { return prob.hess_apply(v); }, b,
                                             Eigen::VectorXd::Zero(prob.dim()), opt.inner_iters, opt.inner_tol);
      rep.inner_iterations = cg.iterations;
      const auto [jend, gend] = prob.cost_grad(cg.x);
      rep.total = jend;
      rep.background = 0.5 * cg.x.squaredNorm();
      rep.observation = jend - rep.background;
      res.reports.push_back(rep);

      const Increment dx0 = prob.analysis_increment(cg.x);
      if (norm2(dx0) == 0.0) break;
      add_in_place(x, dx0);
      shift_members(ens, dx0);
    }

    res.analyses.push_back(x);
    res.analysis_trajectories.push_back(
        integrate(x, grid, win.t0, win.tf, obs.times, {opt.cfl, /*store_checkpoints=*/false}));

    // EnKF/ETKF refresh of the spread at the window start, mean pinned to the
    // variational analysis
    if (!obs.times.empty()) {
      const std::vector<double>& y0 = obs.values.front();
      Ensemble updated = opt.update == En4dvarOptions::Update::etkf
                             ? etkf_update(ens, obs.mask, y0, obs.variance)
                             : enkf_update_perturbed(ens, obs.mask, y0, obs.variance,
                                                     SeededRng::mix(opt.seed, 0xE4D0ULL + w));
      recenter(updated, x);
      ens = std::move(updated);
    }

    // forecast to the next window start
    if (w + 1 < windows.size()) {
      const double t_next = windows[w + 1].t0;
      if (t_next > win.t0 + 1e-12) {
        x = integrate(x, grid, win.t0, t_next, {}, {opt.cfl, false}).states.back();
        const auto trajs = propagate_ensemble(ens, grid, win.t0, t_next, {}, opt.cfl, opt.threads);
        for (int i = 0; i < ens.size(); ++i) ens.members[i] = trajs[i].states.back();
      }
    }
  }

  res.final_ensemble = std::move(ens);
  return res;
}

} // namespace dakit
