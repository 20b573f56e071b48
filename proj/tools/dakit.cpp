// dakit: twin-experiment data assimilation on a 2D shallow-water model.
// Subcommands: simulate | twin-gen | assim-4dvar | assim-en4dvar |
//              verify-adjoint | metrics | sweep-cutoff

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "dakit/en4dvar.hpp"
#include "dakit/harness.hpp"
#include "dakit/io.hpp"
#include "dakit/rng.hpp"
#include "dakit/stochastics.hpp"
#include "dakit/swe.hpp"
#include "dakit/tlm_adjoint.hpp"

namespace fs = std::filesystem;
using namespace dakit;

namespace {

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Config cfg = path.empty() ? Config() : Config::from_file(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got: " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

GridSpec grid_from_config(const Config& cfg) {
  GridSpec g;
  g.nx = cfg.get_int("grid.nx");
  g.ny = cfg.get_int("grid.ny");
  g.dx = cfg.get_double("grid.lx") / g.nx;
  g.dy = cfg.get_double("grid.ly") / g.ny;
  g.gravity = cfg.get_double("grid.gravity");
  g.validate();
  return g;
}

CaseParams case_params_from_config(const Config& cfg) {
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

int cmd_simulate(const Config& raw) {
  const Config cfg = resolve_experiment_config(raw);
  const GridSpec grid = grid_from_config(cfg);
  const std::string outdir = cfg.get_str("output");
  fs::create_directories(outdir);
  cfg.write_file(outdir + "/manifest.txt");

  StateField x0;
  const std::string source = cfg.get_str("sim.state", "truth");
  if (source == "truth" || source == "background") {
    const TwinCase tc = build_case(cfg.get_str("case")[0], grid, case_params_from_config(cfg),
                                   cfg.get_u64("seed", 1));
    x0 = source == "truth" ? tc.truth : tc.background;
  } else {
    auto [g2, s] = read_state_swf1(source);
    if (!g2.same_shape(grid)) throw std::runtime_error("simulate: snapshot grid does not match the config grid");
    x0 = std::move(s);
  }

  const double t0 = cfg.get_double("window.t0");
  const double tf = cfg.get_double("window.tf");
  const int n = cfg.get_int("window.n_obs");
  std::vector<double> record(n);
  for (int k = 0; k < n; ++k) record[k] = t0 + (n > 1 ? k * (tf - t0) / (n - 1) : 0.0);

  const Trajectory traj =
      integrate(x0, grid, t0, tf, record, {cfg.get_double("model.cfl"), /*store_checkpoints=*/false});
  write_state_series(outdir, "state", grid, traj);
  if (cfg.get_bool("output.csv_states", false))
    for (std::size_t m = 0; m < traj.states.size(); ++m) {
      char name[64];
      std::snprintf(name, sizeof(name), "/state_%04zu.csv", m);
      write_state_csv(outdir + name, grid, traj.states[m]);
    }

  const double m0 = total_mass(traj.states.front(), grid);
  const double mf = total_mass(traj.states.back(), grid);
  std::printf("simulated %s over [%g, %g] s, %zu substeps, relative mass drift %.3e\n", source.c_str(), t0, tf,
              traj.checkpoints.size() + traj.steps_before.back(), std::fabs(mf - m0) / m0);
  std::printf("outputs in %s\n", outdir.c_str());
  return 0;
}

int cmd_twin_gen(const Config& raw) {
  Config cfg = raw;
  cfg.set("method", "none");
  const ExperimentSummary s = run_experiment(cfg);
  std::printf("twin experiment written to %s (truth/background snapshots, observations.txt, rmse.csv)\n",
              s.output_dir.c_str());
  return 0;
}

int cmd_assim(const Config& raw, const std::string& method) {
  Config cfg = raw;
  cfg.set("method", method);
  const ExperimentSummary s = run_experiment(cfg);
  std::printf("%s run complete: time-mean RMSE h=%.6e u=%.6e v=%.6e\n", method.c_str(), s.series.mean_h(),
              s.series.mean_u(), s.series.mean_v());
  if (s.loc_rank > 0)
    std::printf("localization rank %d keeping %.4f of the spectrum\n", s.loc_rank, s.loc_energy);
  std::printf("outputs in %s\n", s.output_dir.c_str());
  return 0;
}

int cmd_verify_adjoint(int nx, int ny, double window, std::uint64_t seed) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 0.10 / nx;
  g.dy = 0.25 / ny;
  g.gravity = 9.81;
  CaseParams params;
  const TwinCase tc = build_case('A', g, params, seed);
  const Trajectory traj = integrate(tc.truth, g, 0.0, window, {window});
  SeededRng rng(seed, 500);

  auto random_increment = [&](double scale) {
    Increment d(g);
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < d.comp(c).size(); ++k) d.comp(c)[k] = scale * rng.normal();
    return d;
  };

  std::printf("test,epsilon,residual\n");

  // dot-product identity per substep (worst) and across the window
  double worst_step = 0.0;
  for (const StepCheckpoint& cp : traj.checkpoints) {
    const Increment d = random_increment(1.0);
    const Increment y = random_increment(1.0);
    const double lhs = dot(tlm_step(cp.state, g, cp.dt, d), y);
    const double rhs = dot(d, adjoint_step(cp.state, g, cp.dt, y));
    worst_step = std::max(worst_step, std::fabs(lhs - rhs) / std::fabs(lhs));
  }
  std::printf("dot-product-substep,0,%.6e\n", worst_step);

  const Increment d = random_increment(1.0);
  const Increment y = random_increment(1.0);
  const double lhs = dot(tlm_sweep(traj, d, window), y);
  const double rhs = dot(d, adjoint_sweep(traj, {{window, y}}));
  std::printf("dot-product-window,0,%.6e\n", std::fabs(lhs - rhs) / std::fabs(lhs));

  // Taylor test: || step(x+eps d) - step(x) - eps T d || / eps^2
  const StateField& x = traj.checkpoints.front().state;
  const double dt = traj.checkpoints.front().dt;
  Increment dir = random_increment(1.0);
  scale(dir, 1e-3 / max_abs(dir));
  const StateField fx = step(x, g, dt);
  const TangentState td = tlm_step(x, g, dt, dir);
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    Increment de = dir;
    scale(de, eps);
    Increment err = step(x + de, g, dt) - fx;
    axpy(-eps, td, err);
    std::printf("taylor,%g,%.6e\n", eps, norm2(err) / (eps * eps));
  }
  return 0;
}

int cmd_metrics(const std::string& estimate, const std::string& truth, const std::string& out) {
  const RmseSeries series = rmse_from_series(estimate, truth);
  write_rmse_csv(out, series);
  std::printf("wrote %s (time-mean h=%.6e u=%.6e v=%.6e)\n", out.c_str(), series.mean_h(), series.mean_u(),
              series.mean_v());
  return 0;
}

int cmd_sweep_cutoff(const Config& raw) {
  Config base = resolve_experiment_config(raw);
  base.set("method", "en4dvar");
  base.set("loc.enabled", "true");
  std::vector<double> cutoffs;
  if (base.has("loc.sweep"))
    cutoffs = base.get_list("loc.sweep");
  else
    cutoffs = {0.02, 0.03, 0.05, 0.08};

  const std::string outdir = base.get_str("output");
  fs::create_directories(outdir);
  std::ofstream csv(outdir + "/sweep.csv");
  csv << "cutoff,rank,energy,rmse_h,rmse_u,rmse_v\n";

  double best_score = 1e300, best_cut = 0.0;
  for (double cut : cutoffs) {
    Config cfg = base;
    cfg.set_double("loc.cutoff", cut);
    cfg.set("output", outdir + "/cutoff_" + format_full(cut));
    const ExperimentSummary s = run_experiment(cfg);
    csv << format_full(cut) << ',' << s.loc_rank << ',' << format_full(s.loc_energy) << ','
        << format_full(s.series.mean_h()) << ',' << format_full(s.series.mean_u()) << ','
        << format_full(s.series.mean_v()) << '\n';
    const double score = s.series.mean_h() + 0.5 * (s.series.mean_u() + s.series.mean_v());
    std::printf("cutoff %.4f m: rank %d, rmse h=%.4e u=%.4e v=%.4e\n", cut, s.loc_rank, s.series.mean_h(),
                s.series.mean_u(), s.series.mean_v());
    if (score < best_score) {
      best_score = score;
      best_cut = cut;
    }
  }
  std::printf("optimum cutoff %.4f m (by h + mean velocity RMSE); table in %s/sweep.csv\n", best_cut,
              outdir.c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale data assimilation on a 2D shallow-water model"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto add_config_opts = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "configuration file (key = value lines)");
    sub->add_option("--set", overrides, "override a configuration key (key=value, repeatable)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "free model run from a twin case or snapshot");
  add_config_opts(simulate);
  CLI::App* twin = app.add_subcommand("twin-gen", "generate twin truth, background and observations");
  add_config_opts(twin);
  CLI::App* a4 = app.add_subcommand("assim-4dvar", "incremental (or full) 4DVar twin experiment");
  add_config_opts(a4);
  CLI::App* ae = app.add_subcommand("assim-en4dvar", "ensemble 4DVar twin experiment");
  add_config_opts(ae);

  CLI::App* verify = app.add_subcommand("verify-adjoint", "print dot-product and Taylor residuals as CSV");
  int vnx = 11, vny = 26;
  double vwindow = 0.2;
  std::uint64_t vseed = 1;
  verify->add_option("--nx", vnx, "grid cells in x");
  verify->add_option("--ny", vny, "grid cells in y");
  verify->add_option("--window", vwindow, "window length in seconds");
  verify->add_option("--seed", vseed, "random seed");

  CLI::App* metrics = app.add_subcommand("metrics", "RMSE between two snapshot series");
  std::string est_prefix, truth_prefix, metrics_out = "rmse.csv";
  metrics->add_option("--estimate", est_prefix, "estimate series prefix (dir/prefix)")->required();
  metrics->add_option("--truth", truth_prefix, "truth series prefix (dir/prefix)")->required();
  metrics->add_option("-o,--out", metrics_out, "output CSV path");

  CLI::App* sweep = app.add_subcommand("sweep-cutoff", "run En4DVar across localization cutoffs");
  add_config_opts(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(load_config(config_path, overrides));
    if (twin->parsed()) return cmd_twin_gen(load_config(config_path, overrides));
    if (a4->parsed()) return cmd_assim(load_config(config_path, overrides), "4dvar");
    if (ae->parsed()) return cmd_assim(load_config(config_path, overrides), "en4dvar");
    if (verify->parsed()) return cmd_verify_adjoint(vnx, vny, vwindow, vseed);
    if (metrics->parsed()) return cmd_metrics(est_prefix, truth_prefix, metrics_out);
    if (sweep->parsed()) return cmd_sweep_cutoff(load_config(config_path, overrides));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
