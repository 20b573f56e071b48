#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dakit/harness.hpp"
#include "dakit/io.hpp"
#include "dakit/oracles.hpp"
#include "dakit/rng.hpp"
#include "dakit/swe.hpp"

using namespace dakit;

namespace {

GridSpec grid(int nx = 6, int ny = 8) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 0.1 / nx;
  g.dy = 0.25 / ny;
  g.gravity = 9.81;
  return g;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("build_case: degenerate, case-B slopes, background at rest") {
  const GridSpec g = grid();
  CaseParams p;
  p.grf_variance_h = 0.0;
  p.grf_std_uv = 0.0;
  const TwinCase degenerate = build_case('A', g, p, 1);
  for (std::size_t k = 0; k < degenerate.truth.h.size(); ++k) {
    CHECK(degenerate.truth.h[k] == degenerate.background.h[k]);
    CHECK(degenerate.truth.hu[k] == 0.0);
  }

  CaseParams q;
  const TwinCase a = build_case('A', g, q, 2);
  bool differs = false;
  for (std::size_t k = 0; k < a.truth.h.size(); ++k) {
    differs = differs || a.truth.h[k] != a.background.h[k];
    CHECK(a.background.hu[k] == 0.0);
    CHECK(a.background.hv[k] == 0.0);
  }
  CHECK(differs);

  const TwinCase b = build_case('B', g, q, 3);
  // height difference across the y extent = slope * (ny-1) dy cell-center span
  const double span_y = b.truth.h(2, g.ny - 1) - b.truth.h(2, 0);
  CHECK(span_y == doctest::Approx(0.10 * (g.ny - 1) * g.dy).epsilon(1e-10));
  const double span_x = b.truth.h(g.nx - 1, 3) - b.truth.h(0, 3);
  CHECK(span_x == doctest::Approx(0.21 * (g.nx - 1) * g.dx).epsilon(1e-10));
}

TEST_CASE("make_observations: masks, noise levels, clean innovations") {
  const GridSpec g = grid();
  CaseParams p;
  const TwinCase tc = build_case('A', g, p, 5);
  const Trajectory tt = integrate(tc.truth, g, 0.0, 0.2, {0.0, 0.05, 0.1, 0.15, 0.2}, {0.5, false});

  const ObservationSet vel = make_observations(tt, MaskKind::velocity, 0.0, 1e-3, 1e-3, 5);
  CHECK_FALSE(vel.mask.component_on(0));
  CHECK(vel.mask.component_on(1));
  CHECK(static_cast<int>(vel.values[0].size()) == 2 * g.cells());

  const ObservationSet clean = make_observations(tt, MaskKind::full, 0.0, 0.0, 0.0, 5);
  const auto innov = innovation(tt, clean);
  for (const auto& d : innov)
    for (double x : d) CHECK(x == 0.0);
  for (double v : clean.variance) CHECK(v == 1.0);

  // noisy case has roughly the configured spread
  const ObservationSet noisy = make_observations(tt, MaskKind::height, 1e-3, 0.0, 0.0, 6);
  double acc = 0.0;
  int cnt = 0;
  const auto dn = innovation(tt, noisy);
  for (const auto& d : dn)
    for (double x : d) {
      acc += x * x;
      ++cnt;
    }
  CHECK(std::sqrt(acc / cnt) == doctest::Approx(1e-3).epsilon(0.15));
}

TEST_CASE("missing-data error inflation follows the distance rule") {
  const GridSpec g = grid(5, 4);
  std::vector<std::uint8_t> valid(g.cells(), 1);
  const ScalarField uniform = inflate_missing_obs_error(valid, g, 5e-4, 1.0);
  for (std::size_t k = 0; k < uniform.size(); ++k) CHECK(uniform[k] == doctest::Approx(25e-8));

  // one invalid point adjacent to valid ones: variance (2 sigma)^2
  valid[1 * g.nx + 2] = 0;
  const ScalarField one = inflate_missing_obs_error(valid, g, 5e-4, 1.0);
  CHECK(one(2, 1) == doctest::Approx(std::pow(2.0 * 5e-4, 2)));
  CHECK(one(3, 1) == doctest::Approx(25e-8));

  // a missing block: variance non-decreasing with the distance
  std::vector<std::uint8_t> block(g.cells(), 0);
  for (int j = 0; j < g.ny; ++j) block[static_cast<std::size_t>(j) * g.nx] = 1; // first column valid
  const ScalarField ramp = inflate_missing_obs_error(block, g, 5e-4, 0.7);
  for (int i = 1; i < g.nx; ++i) CHECK(ramp(i, 2) >= ramp(i - 1, 2));

  std::vector<std::uint8_t> empty(g.cells(), 0);
  CHECK_THROWS_AS(inflate_missing_obs_error(empty, g, 5e-4, 1.0), std::invalid_argument);
}

TEST_CASE("rmse: zeros, offsets, and the case-A background distance") {
  const GridSpec g = grid();
  CaseParams p;
  const TwinCase tc = build_case('A', g, p, 7);
  const std::vector<double> times = {0.0, 0.1};
  const Trajectory tt = integrate(tc.truth, g, 0.0, 0.1, times, {0.5, false});
  CHECK(rmse(tt, tt).mean_h() == 0.0);

  // uniform +delta offset on h
  Trajectory shifted = tt;
  for (auto& s : shifted.states)
    for (std::size_t k = 0; k < s.h.size(); ++k) s.h[k] += 2e-3;
  const RmseSeries off = rmse(shifted, tt);
  for (double x : off.h) CHECK(x == doctest::Approx(2e-3).epsilon(1e-9));

  // background vs truth at t0 is near the square root of the perturbation
  // variance (single-draw field statistics, wide tolerance)
  const Trajectory bt = integrate(tc.background, g, 0.0, 0.1, times, {0.5, false});
  const RmseSeries rb = rmse(bt, tt);
  CHECK(rb.h[0] == doctest::Approx(std::sqrt(1.6e-6)).epsilon(0.35));
}

TEST_CASE("kalman oracle: scalar case and dual-gain agreement") {
  // scalar: Pf = 1, H = 1, R = 1, y = 1, xf = 0 -> K = 1/2, xa = 1/2, Pa = 1/2
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd xb = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd y(1);
  y << 1.0;
  const KalmanResult res = kalman_oracle(m, h, r, xb, b, {{0, y}}, 0);
  CHECK(res.analysis_mean[0][0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(res.analysis_cov[0](0, 0) == doctest::Approx(0.5).epsilon(1e-14));

  // R -> infinity: analysis equals the forecast
  Eigen::MatrixXd rinf(1, 1);
  rinf << 1e14;
  const KalmanResult noinfo = kalman_oracle(m, h, rinf, xb, b, {{0, y}}, 0);
  CHECK(std::fabs(noinfo.analysis_mean[0][0]) <= 1e-10);

  // random 10-dimensional fixtures: the two gain forms agree
  SeededRng rng(51);
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 10, q = 6;
    Eigen::MatrixXd mm(n, n), hh(q, n), rr = Eigen::MatrixXd::Zero(q, q), bb(n, n);
    // near-orthogonal dynamics keep the covariances well conditioned
    Eigen::MatrixXd raw(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) raw(i, j) = rng.normal();
    mm = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() * Eigen::MatrixXd::Identity(n, n);
    mm *= 0.9;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < n; ++j) hh(i, j) = rng.normal();
    for (int i = 0; i < q; ++i) rr(i, i) = 0.5 + rng.uniform();
    Eigen::MatrixXd tmp(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) tmp(i, j) = rng.normal();
    bb = 0.1 * tmp * tmp.transpose() + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0[i] = rng.normal();
    std::vector<std::pair<int, Eigen::VectorXd>> obs;
    for (int k = 0; k <= 4; k += 2) {
      Eigen::VectorXd yy(q);
      for (int i = 0; i < q; ++i) yy[i] = rng.normal();
      obs.push_back({k, yy});
    }
    const KalmanResult kr = kalman_oracle(mm, hh, rr, x0, bb, obs, 4);
    CHECK(kr.gain_mismatch <= 1e-10);
    CHECK(kr.cov_mismatch <= 1e-10);
  }
}

TEST_CASE("exact Riemann solution: still water, symmetry, dam break") {
  // equal states: star region equals the states
  const RiemannExact still(1.0, 0.0, 1.0, 0.0, 9.81);
  CHECK(still.h_star() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(still.u_star() == doctest::Approx(0.0).epsilon(1e-12));

  // classic dam break 1.0 / 0.5: left rarefaction, right shock
  const RiemannExact dam(1.0, 0.0, 0.5, 0.0, 9.81);
  CHECK(dam.h_star() > 0.5);
  CHECK(dam.h_star() < 1.0);
  CHECK(dam.u_star() > 0.0);
  // residual of the star equations
  auto fk = [](double h, double hk, double g) {
    return h <= hk ? 2.0 * (std::sqrt(g * h) - std::sqrt(g * hk))
                   : (h - hk) * std::sqrt(0.5 * g * (h + hk) / (h * hk));
  };
  CHECK(fk(dam.h_star(), 1.0, 9.81) + fk(dam.h_star(), 0.5, 9.81) == doctest::Approx(0.0).epsilon(1e-12));
  // sampling is monotone from left to right state
  const auto [h_left, u_left] = dam.sample(-10.0);
  const auto [h_right, u_right] = dam.sample(10.0);
  CHECK(h_left == 1.0);
  CHECK(h_right == 0.5);
  CHECK(u_left == 0.0);
  CHECK(u_right == 0.0);
  const auto [h_mid, u_mid] = dam.sample(0.0);
  CHECK(h_mid == doctest::Approx(dam.h_star()).epsilon(1e-12));
  CHECK(u_mid == doctest::Approx(dam.u_star()).epsilon(1e-12));
}

TEST_CASE("Roe interface flux approximates the exact dam-break flux") {
  const double g = 9.81;
  const Cons3 l = {1.0, 0.0, 0.0}, r = {0.5, 0.0, 0.0};
  const Cons3 roe = roe_flux(l, r, g);
  const RiemannExact exact(1.0, 0.0, 0.5, 0.0, g);
  const auto [h0, u0] = exact.sample(0.0);
  const Cons3 fexact = physical_flux({h0, h0 * u0, 0.0}, g);
  for (int k = 0; k < 3; ++k)
    CHECK(std::fabs(roe[k] - fexact[k]) <= 0.05 * std::max(1.0, std::fabs(fexact[k])));
}

TEST_CASE("linear toy: inner CG matches the dense normal-equations solve") {
  const LinearToy toy = make_advection_toy(20, 0.6, 6, 2, 31);
  const Eigen::VectorXd via_cg = toy_4dvar_solve(toy);
  const Eigen::MatrixXd hess = toy_4dvar_hessian(toy);
  // dense oracle for the same right-hand side
  Eigen::VectorXd b = toy.prior_cov.ldlt().solve(toy.prior_mean);
  const Eigen::MatrixXd rinv =
      toy.obs_cov.ldlt().solve(Eigen::MatrixXd::Identity(toy.obs_cov.rows(), toy.obs_cov.rows()));
  for (const auto& [k, y] : toy.obs_at_steps) {
    Eigen::MatrixXd mk = Eigen::MatrixXd::Identity(20, 20);
    for (int s = 0; s < k; ++s) mk = toy.model * mk;
    b += (toy.obs_op * mk).transpose() * rinv * y;
  }
  const Eigen::VectorXd dense = hess.ldlt().solve(b);
  CHECK((via_cg - dense).norm() <= 1e-8 * dense.norm());
}

TEST_CASE("linear toy: 4DVar equals the Kalman filter at the final time") {
  const LinearToy toy = make_advection_toy(16, 0.7, 8, 2, 9);
  const Eigen::VectorXd x0 = toy_4dvar_solve(toy);
  const KalmanResult kf =
      kalman_oracle(toy.model, toy.obs_op, toy.obs_cov, toy.prior_mean, toy.prior_cov, toy.obs_at_steps, toy.steps);

  Eigen::VectorXd xT = x0;
  for (int s = 0; s < toy.steps; ++s) xT = toy.model * xT;
  CHECK((xT - kf.analysis_mean.back()).norm() <= 1e-8 * kf.analysis_mean.back().norm());

  // inverse Hessian propagated to the window end equals the filter covariance
  const Eigen::MatrixXd hinv = toy_4dvar_hessian(toy).inverse();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(x0.size(), x0.size());
  for (int s = 0; s < toy.steps; ++s) phi = toy.model * phi;
  const Eigen::MatrixXd pa = phi * hinv * phi.transpose();
  CHECK((pa - kf.analysis_cov.back()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("state series round-trip and rmse_from_series") {
  const GridSpec g = grid(4, 5);
  CaseParams p;
  const TwinCase tc = build_case('A', g, p, 11);
  const Trajectory tt = integrate(tc.truth, g, 0.0, 0.04, {0.0, 0.04}, {0.5, false});
  const Trajectory bt = integrate(tc.background, g, 0.0, 0.04, {0.0, 0.04}, {0.5, false});

  const std::string dir = "harness_series_test";
  write_state_series(dir, "truth", g, tt);
  write_state_series(dir, "est", g, bt);
  const RmseSeries from_disk = rmse_from_series(dir + "/est", dir + "/truth");
  const RmseSeries direct = rmse(bt, tt);
  REQUIRE(from_disk.times.size() == direct.times.size());
  for (std::size_t k = 0; k < direct.times.size(); ++k) CHECK(from_disk.h[k] == direct.h[k]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_experiment: free run matches background RMSE and manifests replay") {
  Config cfg;
  cfg.set("case", "A");
  cfg.set("method", "none");
  cfg.set("grid.nx", "5");
  cfg.set("grid.ny", "7");
  cfg.set("window.tf", "0.1");
  cfg.set("window.n_obs", "3");
  cfg.set("seed", "123");
  cfg.set("output", "exp_none_test");
  const ExperimentSummary s = run_experiment(cfg);
  CHECK(s.series.times.size() == 3);
  CHECK(s.series.mean_h() > 0.0);

  // replay from the manifest: byte-identical CSV outputs
  Config manifest = Config::from_file("exp_none_test/manifest.txt");
  manifest.set("output", "exp_none_test2");
  run_experiment(manifest);
  CHECK(slurp("exp_none_test/rmse.csv") == slurp("exp_none_test2/rmse.csv"));
  std::filesystem::remove_all("exp_none_test");
  std::filesystem::remove_all("exp_none_test2");
}
