#include "dakit/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dakit/en4dvar.hpp"
#include "dakit/io.hpp"
#include "dakit/stochastics.hpp"
#include "dakit/swe.hpp"
#include "dakit/var4d.hpp"

namespace dakit {

namespace fs = std::filesystem;

namespace {

GridSpec grid_from(const Config& cfg) {
  GridSpec g;
  g.nx = cfg.get_int("grid.nx");
  g.ny = cfg.get_int("grid.ny");
  g.dx = cfg.get_double("grid.lx") / g.nx;
  g.dy = cfg.get_double("grid.ly") / g.ny;
  g.gravity = cfg.get_double("grid.gravity");
  g.validate();
  return g;
}

CaseParams case_params_from(const Config& cfg) {
  CaseParams p;
  p.depth = cfg.get_double("case.depth");
  p.slope_x = cfg.get_double("case.slope_x");
  p.case_b_slope_x = cfg.get_double("case.b_slope_x");
  p.case_b_slope_y = cfg.get_double("case.b_slope_y");
  p.grf_variance_h = cfg.get_double("case.grf_variance_h");
  p.grf_std_uv = cfg.get_double("case.grf_std_uv");
  p.corr_len_frac = cfg.get_double("case.corr_len");
  return p;
}

double field_std(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s / a.size());
}

void write_cost_csv(const std::string& path, const std::vector<CostReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,J_total,J_bg,J_obs,grad_norm\n";
  for (std::size_t k = 0; k < reports.size(); ++k)
    out << k << ',' << format_full(reports[k].total) << ',' << format_full(reports[k].background) << ','
        << format_full(reports[k].observation) << ',' << format_full(reports[k].grad_norm) << '\n';
}

} // namespace

Config resolve_experiment_config(const Config& cfg) {
  Config r = cfg;
  auto def = [&](const std::string& k, const std::string& v) {
    if (!r.has(k)) r.set(k, v);
  };
  def("case", "A");
  def("method", "en4dvar");
  def("grid.nx", "11");
  def("grid.ny", "26");
  def("grid.lx", "0.10");
  def("grid.ly", "0.25");
  def("grid.gravity", "9.81");
  def("case.depth", "0.05");
  def("case.slope_x", "0.20");
  def("case.b_slope_x", "0.21");
  def("case.b_slope_y", "0.10");
  def("case.grf_variance_h", "1.6e-6");
  def("case.grf_std_uv", "1e-3");
  def("case.corr_len", "0.05");
  def("window.t0", "0");
  def("window.tf", "0.2");
  def("window.n_obs", "5");
  // forecast span between the twin initial states and the first window;
  // lets transients organize before assimilation starts
  def("case.spinup", "0");
  def("cycle.windows", "1");
  def("cycle.update", "enkf");
  def("obs.mask", "velocity");
  def("obs.sigma_h", "1e-3");
  def("obs.sigma_u", "1e-3");
  def("obs.sigma_v", r.get_str("obs.sigma_u", "1e-3"));
  def("obs.missing_growth", "1");
  def("bg.sigma_h", "auto");
  def("bg.sigma_u", "auto");
  def("model.cfl", "0.5");
  const std::string method = r.get_str("method");
  def("outer.iters", method == "4dvar" ? "3" : "1");
  def("inner.iters", method == "4dvar" ? "50" : "100");
  def("inner.tol", "1e-4");
  def("4dvar.mode", "incremental");
  def("ens.size", "16");
  def("ens.init", "gauss");
  // members drawn from the same perturbation law as the truth, so the
  // ensemble samples the actual background-error covariance
  def("ens.init.variance_h", r.get_str("case.grf_variance_h"));
  def("ens.init.std_uv", r.get_str("case.grf_std_uv"));
  def("ens.init.corr_len", r.get_str("case.corr_len"));
  def("ens.para.x_range", "0.15,0.25");
  def("ens.para.y_range", "-0.10,0.10");
  // the twin truth starts unbalanced at t0, so the matching ensemble does too
  def("ens.balance_steps", "0");
  def("loc.enabled", "false");
  def("loc.kind", "gaspari-cohn");
  def("loc.cutoff", "0.02");
  def("loc.energy", "0.99");
  def("loc.modes", "0");
  def("seed", "1");
  def("threads", "1");
  def("output", "runs/out");
  def("output.csv_states", "false");
  return r;
}

ExperimentSummary run_experiment(const Config& raw_cfg) {
  const Config cfg = resolve_experiment_config(raw_cfg);
  const GridSpec grid = grid_from(cfg);
  const CaseParams params = case_params_from(cfg);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const double cfl = cfg.get_double("model.cfl");
  const std::string method = cfg.get_str("method");
  const std::string outdir = cfg.get_str("output");

  fs::create_directories(outdir);
  cfg.write_file(outdir + "/manifest.txt");

  // observation / window schedule, shifted by the spin-up span
  const double spinup = cfg.get_double("case.spinup");
  const double t0 = cfg.get_double("window.t0") + spinup;
  const double tf = cfg.get_double("window.tf") + spinup;
  const int n_obs = cfg.get_int("window.n_obs");
  const int n_windows = cfg.get_int("cycle.windows");
  if (n_obs < 1 || tf <= t0 || spinup < 0) throw std::invalid_argument("run_experiment: bad window configuration");
  if (spinup > 0 && cfg.get_double("window.t0") != 0.0)
    throw std::invalid_argument("run_experiment: case.spinup requires window.t0 = 0");
  const double dt_obs = n_obs > 1 ? (tf - t0) / (n_obs - 1) : 0.0;
  const int n_total_obs = n_obs + (n_windows - 1);
  std::vector<double> obs_times(n_total_obs);
  for (int k = 0; k < n_total_obs; ++k) obs_times[k] = t0 + k * dt_obs;

  // twin truth and background
  const char which = cfg.get_str("case")[0];
  const TwinCase tc = build_case(which, grid, params, seed);
  write_state_swf1(outdir + "/truth0.swf", grid, tc.truth);
  write_state_swf1(outdir + "/background0.swf", grid, tc.background);
  if (cfg.get_bool("output.csv_states", false)) {
    write_state_csv(outdir + "/truth0.csv", grid, tc.truth);
    write_state_csv(outdir + "/background0.csv", grid, tc.background);
  }

  StateField truth_start = tc.truth;
  StateField background_start = tc.background;
  if (spinup > 0) {
    truth_start = integrate(tc.truth, grid, 0.0, spinup, {}, {cfl, false}).states.back();
    background_start = integrate(tc.background, grid, 0.0, spinup, {}, {cfl, false}).states.back();
  }

  const Trajectory truth_traj = integrate(truth_start, grid, t0, obs_times.back(), obs_times, {cfl, false});
  write_state_series(outdir, "truth", grid, truth_traj);

  const MaskKind mask = mask_kind_from_string(cfg.get_str("obs.mask"));
  ObservationSet obs = make_observations(truth_traj, mask, cfg.get_double("obs.sigma_h"),
                                         cfg.get_double("obs.sigma_u"), cfg.get_double("obs.sigma_v"), seed);

  // optional missing-data region on the height component: variance inflated
  // with the distance to the nearest valid point
  if (cfg.has("obs.missing_rect") && obs.mask.component_on(0)) {
    const auto r = cfg.get_list("obs.missing_rect"); // i0,j0,i1,j1
    if (r.size() != 4) throw std::invalid_argument("obs.missing_rect needs i0,j0,i1,j1");
    std::vector<std::uint8_t> valid(grid.cells(), 1);
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i)
        if (i >= r[0] && j >= r[1] && i <= r[2] && j <= r[3]) valid[static_cast<std::size_t>(j) * grid.nx + i] = 0;
    const ScalarField var =
        inflate_missing_obs_error(valid, grid, cfg.get_double("obs.sigma_h"), cfg.get_double("obs.missing_growth"));
    for (int k = 0; k < grid.cells(); ++k) obs.variance[k] = var[k];
  }
  write_observations(outdir + "/observations.txt", obs);

  // background error standard deviations ("auto" = measured truth deviation,
  // the twin-experiment convention)
  double sigma_h_bg, sigma_u_bg;
  if (cfg.get_str("bg.sigma_h") == "auto")
    sigma_h_bg = std::max(field_std(truth_start.h, background_start.h), 1e-6);
  else
    sigma_h_bg = cfg.get_double("bg.sigma_h");
  if (cfg.get_str("bg.sigma_u") == "auto") {
    ScalarField ut(grid.nx, grid.ny), ub(grid.nx, grid.ny), vt(grid.nx, grid.ny), vb(grid.nx, grid.ny);
    for (std::size_t k = 0; k < ut.size(); ++k) {
      ut[k] = truth_start.hu[k] / truth_start.h[k];
      vt[k] = truth_start.hv[k] / truth_start.h[k];
      ub[k] = background_start.hu[k] / background_start.h[k];
      vb[k] = background_start.hv[k] / background_start.h[k];
    }
    sigma_u_bg = std::max(std::sqrt(0.5 * (std::pow(field_std(ut, ub), 2) + std::pow(field_std(vt, vb), 2))), 1e-6);
  } else {
    sigma_u_bg = cfg.get_double("bg.sigma_u");
  }
  const double sigma_hu_bg = sigma_u_bg * params.depth;

  ExperimentSummary summary;
  summary.output_dir = outdir;
  std::vector<CostReport> cost_rows;

  if (method == "none") {
    const RmseSeries series = rmse(integrate(background_start, grid, t0, obs_times.back(), obs_times, {cfl, false}),
                                   truth_traj);
    summary.series = series;
  } else if (method == "4dvar") {
    StateField x_bg = background_start;
    for (int w = 0; w < n_windows; ++w) {
      const double w_t0 = obs_times[w];
      const double w_tf = obs_times[w + n_obs - 1];
      ObservationSet wobs;
      wobs.mask = obs.mask;
      wobs.variance = obs.variance;
      for (int k = w; k < w + n_obs; ++k) {
        wobs.times.push_back(obs.times[k]);
        wobs.values.push_back(obs.values[k]);
      }
      const BackgroundModel bg(x_bg, sigma_h_bg * sigma_h_bg, sigma_hu_bg * sigma_hu_bg,
                               sigma_hu_bg * sigma_hu_bg);
      Var4dOptions opt;
      opt.mode = cfg.get_str("4dvar.mode") == "full" ? Var4dOptions::Mode::full : Var4dOptions::Mode::incremental;
      opt.outer_iters = cfg.get_int("outer.iters");
      opt.inner_iters = cfg.get_int("inner.iters");
      opt.inner_tol = cfg.get_double("inner.tol");
      opt.cfl = cfl;
      const Var4dResult res = run_4dvar(grid, {w_t0, w_tf, cfl}, bg, wobs, opt);
      cost_rows.insert(cost_rows.end(), res.reports.begin(), res.reports.end());

      write_state_swf1(outdir + "/analysis_w" + std::to_string(w) + ".swf", grid, res.analysis);
      Trajectory wtruth;
      wtruth.grid = grid;
      for (int k = w; k < w + n_obs; ++k) {
        wtruth.times.push_back(truth_traj.times[k]);
        wtruth.states.push_back(truth_traj.states[k]);
      }
      Trajectory est = res.trajectory;
      append_rmse(summary.series, rmse(est, wtruth));
      if (w == 0) write_state_series(outdir, "analysis", grid, est);

      if (w + 1 < n_windows)
        x_bg = integrate(res.analysis, grid, w_t0, obs_times[w + 1], {}, {cfl, false}).states.back();
    }
  } else if (method == "en4dvar") {
    Ensemble ens;
    const double corr_len = cfg.get_double("ens.init.corr_len") * std::max(grid.length_x(), grid.length_y());
    if (cfg.get_str("ens.init") == "para") {
      const auto xr = cfg.get_list("ens.para.x_range");
      const auto yr = cfg.get_list("ens.para.y_range");
      ens = make_ensemble_para(tc.background, grid, cfg.get_int("ens.size"), {xr[0], xr[1]}, {yr[0], yr[1]},
                               SeededRng::mix(seed, 300));
    } else {
      ens = make_ensemble_gauss(tc.background, grid, cfg.get_int("ens.size"),
                                cfg.get_double("ens.init.variance_h"),
                                std::pow(cfg.get_double("ens.init.std_uv"), 2), corr_len,
                                SeededRng::mix(seed, 301));
    }
    ens = balance_ensemble(ens, grid, cfg.get_int("ens.balance_steps"), cfl);
    if (spinup > 0) {
      const auto spun = propagate_ensemble(ens, grid, 0.0, spinup, {}, cfl, cfg.get_int("threads"));
      for (int i = 0; i < ens.size(); ++i) ens.members[i] = spun[i].states.back();
    }

    std::vector<En4dvarWindow> windows(n_windows);
    for (int w = 0; w < n_windows; ++w) {
      windows[w].t0 = obs_times[w];
      windows[w].tf = obs_times[w + n_obs - 1];
      for (int k = w; k < w + n_obs; ++k) windows[w].obs_indices.push_back(k);
    }
    En4dvarOptions opt;
    opt.outer_iters = cfg.get_int("outer.iters");
    opt.inner_iters = cfg.get_int("inner.iters");
    opt.inner_tol = cfg.get_double("inner.tol");
    opt.cfl = cfl;
    opt.localization = cfg.get_bool("loc.enabled", false);
    opt.loc_kind = correlation_kind_from_string(cfg.get_str("loc.kind"));
    opt.loc_cutoff = cfg.get_double("loc.cutoff");
    opt.loc_energy = cfg.get_double("loc.energy");
    opt.loc_modes = cfg.get_int("loc.modes");
    opt.update = cfg.get_str("cycle.update") == "etkf" ? En4dvarOptions::Update::etkf
                                                       : En4dvarOptions::Update::enkf;
    opt.seed = SeededRng::mix(seed, 400);
    opt.threads = cfg.get_int("threads");

    const En4dvarResult res = run_en4dvar_cycle(grid, background_start, ens, obs, windows, opt);
    cost_rows = res.reports;
    summary.loc_rank = res.loc_rank;
    summary.loc_energy = res.loc_energy;

    for (int w = 0; w < n_windows; ++w) {
      write_state_swf1(outdir + "/analysis_w" + std::to_string(w) + ".swf", grid, res.analyses[w]);
      Trajectory wtruth;
      wtruth.grid = grid;
      for (std::size_t k : windows[w].obs_indices) {
        wtruth.times.push_back(truth_traj.times[k]);
        wtruth.states.push_back(truth_traj.states[k]);
      }
      append_rmse(summary.series, rmse(res.analysis_trajectories[w], wtruth));
      if (w == 0) write_state_series(outdir, "analysis", grid, res.analysis_trajectories[w]);
    }
  } else {
    throw std::invalid_argument("run_experiment: unknown method " + method);
  }

  write_rmse_csv(outdir + "/rmse.csv", summary.series);
  write_cost_csv(outdir + "/cost.csv", cost_rows);

  Config meta;
  meta.set_int("loc.rank", summary.loc_rank);
  meta.set_double("loc.energy_kept", summary.loc_energy);
  meta.set_double("rmse.mean_h", summary.series.mean_h());
  meta.set_double("rmse.mean_u", summary.series.mean_u());
  meta.set_double("rmse.mean_v", summary.series.mean_v());
  meta.set_double("bg.sigma_h_resolved", sigma_h_bg);
  meta.set_double("bg.sigma_u_resolved", sigma_u_bg);
  meta.write_file(outdir + "/summary.txt");
  return summary;
}

} // namespace dakit
