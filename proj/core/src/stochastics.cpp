#include "dakit/stochastics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dakit/swe.hpp"

namespace dakit {

StateField Ensemble::mean() const {
  if (members.empty()) throw std::invalid_argument("Ensemble: empty");
  StateField m(members.front().nx(), members.front().ny());
  for (const StateField& s : members)
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < m.comp(c).size(); ++k) m.comp(c)[k] += s.comp(c)[k];
  const double inv = 1.0 / static_cast<double>(members.size());
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < m.comp(c).size(); ++k) m.comp(c)[k] *= inv;
  return m;
}

void Ensemble::validate() const {
  if (size() < 2) throw std::invalid_argument("Ensemble: at least two members required");
  for (const StateField& s : members)
    if (s.nx() != members.front().nx() || s.ny() != members.front().ny())
      throw std::invalid_argument("Ensemble: members on different grids");
}

GrfSampler::GrfSampler(const GridSpec& grid, double variance, double corr_len_m)
    : nx_(grid.nx), ny_(grid.ny) {
  if (variance < 0.0) throw std::invalid_argument("GrfSampler: variance must be >= 0");
  if (variance == 0.0) {
    zero_ = true;
    return;
  }
  if (corr_len_m <= 0.0) throw std::invalid_argument("GrfSampler: correlation length must be > 0");
  const int n = grid.cells();
  Eigen::MatrixXd cov(n, n);
  for (int b = 0; b < n; ++b) {
    const int ib = b % grid.nx, jb = b / grid.nx;
    for (int a = 0; a <= b; ++a) {
      const int ia = a % grid.nx, ja = a / grid.nx;
      const double d = std::hypot((ia - ib) * grid.dx, (ja - jb) * grid.dy);
      const double c = variance * std::exp(-d / corr_len_m);
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    jittered_ = true;
    cov.diagonal().array() += 1e-12 * variance;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("GrfSampler: covariance factorization failed");
  }
  factor_ = llt.matrixL();
}

ScalarField GrfSampler::sample(SeededRng& rng) const {
  const int n = nx_ * ny_;
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) z[k] = rng.normal();
  ScalarField f(nx_, ny_);
  if (zero_) return f;
  const Eigen::VectorXd x = factor_ * z;
  for (int k = 0; k < n; ++k) f[k] = x[k];
  return f;
}

ScalarField sample_grf(const GridSpec& grid, double variance, double corr_len_m, SeededRng& rng) {
  return GrfSampler(grid, variance, corr_len_m).sample(rng);
}

Ensemble make_ensemble_gauss(const StateField& background, const GridSpec& grid, int n, double var_h,
                             double var_uv, double corr_len_m, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("make_ensemble_gauss: n must be >= 2");
  const GrfSampler sampler_h(grid, var_h, corr_len_m);
  const GrfSampler sampler_uv(grid, var_uv, corr_len_m);
  Ensemble ens;
  ens.members.reserve(n);
  for (int i = 0; i < n; ++i) {
    SeededRng rng(seed, static_cast<std::uint64_t>(i));
    const ScalarField dh = sampler_h.sample(rng);
    const ScalarField du = sampler_uv.sample(rng);
    const ScalarField dv = sampler_uv.sample(rng);
    StateField m = background;
    for (std::size_t k = 0; k < m.h.size(); ++k) {
      const double h0 = background.h[k];
      const double u = background.hu[k] / h0 + du[k];
      const double v = background.hv[k] / h0 + dv[k];
      const double h = h0 + dh[k];
      if (h <= 0.0) throw std::runtime_error("make_ensemble_gauss: perturbation drained a cell");
      m.h[k] = h;
      m.hu[k] = h * u;
      m.hv[k] = h * v;
    }
    ens.members.push_back(std::move(m));
  }
  return ens;
}

Ensemble make_ensemble_para(const StateField& background, const GridSpec& grid, int n,
                            std::pair<double, double> slope_x_range, std::pair<double, double> slope_y_range,
                            std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("make_ensemble_para: n must be >= 2");
  double hbar = 0.0;
  for (std::size_t k = 0; k < background.h.size(); ++k) hbar += background.h[k];
  hbar /= static_cast<double>(background.h.size());
  const double cx = 0.5 * grid.length_x();
  const double cy = 0.5 * grid.length_y();

  Ensemble ens;
  ens.members.reserve(n);
  for (int i = 0; i < n; ++i) {
    SeededRng rng(seed, static_cast<std::uint64_t>(i));
    const double sx = rng.uniform(slope_x_range.first, slope_x_range.second);
    const double sy = rng.uniform(slope_y_range.first, slope_y_range.second);
    StateField m(grid);
    for (int j = 0; j < grid.ny; ++j)
      for (int ii = 0; ii < grid.nx; ++ii)
        m.h(ii, j) = hbar + sx * (grid.xc(ii) - cx) + sy * (grid.yc(j) - cy);
    ens.members.push_back(std::move(m));
  }
  // re-center so the ensemble mean equals the background exactly
  const StateField mean = ens.mean();
  for (StateField& m : ens.members)
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < m.comp(c).size(); ++k)
        m.comp(c)[k] += background.comp(c)[k] - mean.comp(c)[k];
  for (const StateField& m : ens.members)
    for (std::size_t k = 0; k < m.h.size(); ++k)
      if (m.h[k] <= 0.0) throw std::runtime_error("make_ensemble_para: slopes drained a cell");
  return ens;
}

Ensemble balance_ensemble(const Ensemble& ens, const GridSpec& grid, int n_steps, double cfl) {
  if (n_steps < 0) throw std::invalid_argument("balance_ensemble: n_steps must be >= 0");
  Ensemble out = ens;
  for (StateField& m : out.members)
    for (int s = 0; s < n_steps; ++s) m = step(m, grid, stable_dt(m, grid, cfl));
  return out;
}

ObservationSet perturb_observations(const ObservationSet& clean, std::uint64_t seed) {
  ObservationSet noisy = clean;
  SeededRng rng(seed, /*stream=*/0x0b5ULL);
  for (auto& vals : noisy.values)
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += std::sqrt(clean.variance[k]) * rng.normal();
  return noisy;
}

} // namespace dakit
