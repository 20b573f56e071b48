#include "dakit/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dakit/io.hpp"
#include "dakit/rng.hpp"
#include "dakit/stochastics.hpp"

namespace dakit {

namespace {

StateField tilted_plane(const GridSpec& grid, double depth, double sx, double sy) {
  StateField s(grid);
  const double cx = 0.5 * grid.length_x();
  const double cy = 0.5 * grid.length_y();
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double h = depth + sx * (grid.xc(i) - cx) + sy * (grid.yc(j) - cy);
      if (h <= 0.0) throw std::invalid_argument("tilted_plane: slope drains the tank");
      s.h(i, j) = h;
    }
  return s;
}

} // namespace

TwinCase build_case(char which, const GridSpec& grid, const CaseParams& p, std::uint64_t seed) {
  TwinCase tc;
  tc.background = tilted_plane(grid, p.depth, p.slope_x, 0.0);

  const double corr_len = p.corr_len_frac * std::max(grid.length_x(), grid.length_y());
  if (which == 'A') {
    tc.truth = tc.background;
    SeededRng rng_h(seed, 100), rng_u(seed, 101), rng_v(seed, 102);
    const ScalarField dh = p.grf_variance_h > 0.0 ? sample_grf(grid, p.grf_variance_h, corr_len, rng_h)
                                                  : ScalarField(grid.nx, grid.ny);
    const double var_uv = p.grf_std_uv * p.grf_std_uv;
    const ScalarField du =
        var_uv > 0.0 ? sample_grf(grid, var_uv, corr_len, rng_u) : ScalarField(grid.nx, grid.ny);
    const ScalarField dv =
        var_uv > 0.0 ? sample_grf(grid, var_uv, corr_len, rng_v) : ScalarField(grid.nx, grid.ny);
    for (std::size_t k = 0; k < tc.truth.h.size(); ++k) {
      const double h = tc.background.h[k] + dh[k];
      if (h <= 0.0) throw std::runtime_error("build_case: perturbation drained a cell");
      tc.truth.h[k] = h;
      tc.truth.hu[k] = h * du[k];
      tc.truth.hv[k] = h * dv[k];
    }
  } else if (which == 'B') {
    tc.truth = tilted_plane(grid, p.depth, p.case_b_slope_x, p.case_b_slope_y);
    SeededRng rng_u(seed, 101), rng_v(seed, 102);
    const double var_uv = p.grf_std_uv * p.grf_std_uv;
    if (var_uv > 0.0) {
      const ScalarField du = sample_grf(grid, var_uv, corr_len, rng_u);
      const ScalarField dv = sample_grf(grid, var_uv, corr_len, rng_v);
      for (std::size_t k = 0; k < tc.truth.h.size(); ++k) {
        tc.truth.hu[k] = tc.truth.h[k] * du[k];
        tc.truth.hv[k] = tc.truth.h[k] * dv[k];
      }
    }
  } else {
    throw std::invalid_argument("build_case: case must be 'A' or 'B'");
  }
  return tc;
}

MaskKind mask_kind_from_string(const std::string& s) {
  if (s == "height" || s == "h") return MaskKind::height;
  if (s == "velocity" || s == "uv") return MaskKind::velocity;
  if (s == "full" || s == "all") return MaskKind::full;
  throw std::invalid_argument("unknown observation mask: " + s);
}

ObsMask make_mask(MaskKind kind, const GridSpec& grid) {
  switch (kind) {
  case MaskKind::height:
    return ObsMask::height_only(grid);
  case MaskKind::velocity:
    return ObsMask::velocity_only(grid);
  default:
    return ObsMask::full(grid);
  }
}

ObservationSet make_observations(const Trajectory& truth, MaskKind kind, double sigma_h, double sigma_u,
                                 double sigma_v, std::uint64_t seed) {
  ObservationSet obs;
  obs.mask = make_mask(kind, truth.grid);
  obs.times = truth.times;

  const std::size_t ncell = static_cast<std::size_t>(truth.grid.cells());
  const double sig[3] = {sigma_h, sigma_u, sigma_v};
  for (int c = 0; c < 3; ++c) {
    if (!obs.mask.component_on(c)) continue;
    const double var = sig[c] > 0.0 ? sig[c] * sig[c] : 1.0;
    for (std::size_t k = 0; k < ncell; ++k) obs.variance.push_back(var);
  }
  for (const StateField& s : truth.states) obs.values.push_back(observe(s, obs.mask));

  bool any_noise = false;
  for (int c = 0; c < 3; ++c) any_noise = any_noise || (obs.mask.component_on(c) && sig[c] > 0.0);
  if (any_noise) {
    SeededRng rng(seed, 200);
    std::vector<double> stds;
    for (int c = 0; c < 3; ++c) {
      if (!obs.mask.component_on(c)) continue;
      for (std::size_t k = 0; k < ncell; ++k) stds.push_back(sig[c] > 0.0 ? sig[c] : 0.0);
    }
    for (auto& vals : obs.values)
      for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += stds[k] * rng.normal();
  }
  obs.validate();
  return obs;
}

ScalarField inflate_missing_obs_error(const std::vector<std::uint8_t>& valid, const GridSpec& grid,
                                      double sigma_o, double growth) {
  if (valid.size() != static_cast<std::size_t>(grid.cells()))
    throw std::invalid_argument("inflate_missing_obs_error: mask size mismatch");
  bool any = false;
  for (auto b : valid) any = any || b;
  if (!any) throw std::invalid_argument("inflate_missing_obs_error: no valid points");

  ScalarField var(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (valid[static_cast<std::size_t>(j) * grid.nx + i]) {
        var(i, j) = sigma_o * sigma_o;
        continue;
      }
      double d2min = 1e300;
      for (int jj = 0; jj < grid.ny; ++jj)
        for (int ii = 0; ii < grid.nx; ++ii)
          if (valid[static_cast<std::size_t>(jj) * grid.nx + ii]) {
            const double d2 = double(ii - i) * (ii - i) + double(jj - j) * (jj - j);
            d2min = std::min(d2min, d2);
          }
      const double s = sigma_o * (1.0 + growth * std::sqrt(d2min));
      var(i, j) = s * s;
    }
  return var;
}

double RmseSeries::mean_h() const {
  double s = 0.0;
  for (double x : h) s += x;
  return h.empty() ? 0.0 : s / h.size();
}

double RmseSeries::mean_u() const {
  double s = 0.0;
  for (double x : u) s += x;
  return u.empty() ? 0.0 : s / u.size();
}

double RmseSeries::mean_v() const {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double RmseSeries::mean_velocity() const {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += std::sqrt(0.5 * (u[k] * u[k] + v[k] * v[k]));
  return u.empty() ? 0.0 : s / u.size();
}

RmseSeries rmse(const Trajectory& estimate, const Trajectory& truth) {
  if (estimate.times.size() != truth.times.size())
    throw std::invalid_argument("rmse: trajectories record different times");
  RmseSeries out;
  for (std::size_t m = 0; m < estimate.times.size(); ++m) {
    if (std::fabs(estimate.times[m] - truth.times[m]) > 1e-9)
      throw std::invalid_argument("rmse: record time mismatch");
    const StateField& a = estimate.states[m];
    const StateField& b = truth.states[m];
    double sh = 0.0, su = 0.0, sv = 0.0;
    const std::size_t n = a.h.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double dh = a.h[k] - b.h[k];
      const double du = a.hu[k] / a.h[k] - b.hu[k] / b.h[k];
      const double dv = a.hv[k] / a.h[k] - b.hv[k] / b.h[k];
      sh += dh * dh;
      su += du * du;
      sv += dv * dv;
    }
    out.times.push_back(estimate.times[m]);
    out.h.push_back(std::sqrt(sh / n));
    out.u.push_back(std::sqrt(su / n));
    out.v.push_back(std::sqrt(sv / n));
  }
  return out;
}

void append_rmse(RmseSeries& into, const RmseSeries& tail) {
  into.times.insert(into.times.end(), tail.times.begin(), tail.times.end());
  into.h.insert(into.h.end(), tail.h.begin(), tail.h.end());
  into.u.insert(into.u.end(), tail.u.begin(), tail.u.end());
  into.v.insert(into.v.end(), tail.v.begin(), tail.v.end());
}

void write_rmse_csv(const std::string& path, const RmseSeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "time,rmse_h,rmse_u,rmse_v\n";
  for (std::size_t k = 0; k < series.times.size(); ++k)
    out << format_full(series.times[k]) << ',' << format_full(series.h[k]) << ',' << format_full(series.u[k])
        << ',' << format_full(series.v[k]) << '\n';
}

void write_state_series(const std::string& dir, const std::string& prefix, const GridSpec& grid,
                        const Trajectory& traj) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream times(dir + "/" + prefix + "_times.csv");
  if (!times) throw std::runtime_error("cannot write time index in " + dir);
  times << "index,time\n";
  for (std::size_t m = 0; m < traj.times.size(); ++m) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04zu.swf", prefix.c_str(), m);
    write_state_swf1(dir + "/" + name, grid, traj.states[m]);
    times << m << ',' << format_full(traj.times[m]) << '\n';
  }
}

RmseSeries rmse_from_series(const std::string& estimate_prefix, const std::string& truth_prefix) {
  auto load = [](const std::string& prefix) {
    std::ifstream times(prefix + "_times.csv");
    if (!times) throw std::runtime_error("cannot open " + prefix + "_times.csv");
    std::string header;
    std::getline(times, header);
    Trajectory traj;
    std::string line;
    while (std::getline(times, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      const std::size_t idx = std::stoul(line.substr(0, comma));
      const double t = std::stod(line.substr(comma + 1));
      char name[64];
      std::snprintf(name, sizeof(name), "_%04zu.swf", idx);
      auto [g, s] = read_state_swf1(prefix + name);
      traj.grid = g;
      traj.times.push_back(t);
      traj.states.push_back(std::move(s));
    }
    return traj;
  };
  const Trajectory est = load(estimate_prefix);
  Trajectory truth = load(truth_prefix);
  // align on the estimate's instants; the truth series may cover more
  Trajectory aligned;
  aligned.grid = truth.grid;
  for (double t : est.times) {
    aligned.times.push_back(t);
    aligned.states.push_back(truth.state_at(t));
  }
  return rmse(est, aligned);
}

} // namespace dakit
