#include "dakit/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "dakit/optim.hpp"
#include "dakit/rng.hpp"

namespace dakit {

namespace {

// Riemann invariant / Rankine-Hugoniot function for one side
double wave_fn(double h, double hk, double g) {
  if (h <= hk) return 2.0 * (std::sqrt(g * h) - std::sqrt(g * hk)); // rarefaction
  return (h - hk) * std::sqrt(0.5 * g * (h + hk) / (h * hk));       // shock
}

double wave_fn_deriv(double h, double hk, double g) {
  if (h <= hk) return std::sqrt(g / h);
  const double a = std::sqrt(0.5 * g * (h + hk) / (h * hk));
  return a + (h - hk) * 0.25 * g * (1.0 / hk - hk / (h * h)) / a;
}

} // namespace

RiemannExact::RiemannExact(double hl, double ul, double hr, double ur, double gravity)
    : hl_(hl), ul_(ul), hr_(hr), ur_(ur), g_(gravity) {
  if (hl <= 0.0 || hr <= 0.0) throw std::domain_error("RiemannExact: dry states unsupported");
  const double cl = std::sqrt(g_ * hl), cr = std::sqrt(g_ * hr);
  if (ur - ul >= 2.0 * (cl + cr)) throw std::domain_error("RiemannExact: vacuum forms");
  // two-rarefaction estimate as the Newton start
  double h = std::pow(0.5 * (cl + cr) - 0.25 * (ur - ul), 2) / g_;
  h = std::max(h, 1e-12 * std::min(hl, hr));
  for (int it = 0; it < 100; ++it) {
    const double f = wave_fn(h, hl, g_) + wave_fn(h, hr, g_) + ur - ul;
    const double df = wave_fn_deriv(h, hl, g_) + wave_fn_deriv(h, hr, g_);
    double hn = h - f / df;
    if (hn <= 0.0) hn = 0.5 * h;
    if (std::fabs(hn - h) <= 1e-15 * std::max(1.0, h)) {
      h = hn;
      break;
    }
    h = hn;
  }
  h_star_ = h;
  u_star_ = 0.5 * (ul + ur) + 0.5 * (wave_fn(h, hr, g_) - wave_fn(h, hl, g_));
}

std::pair<double, double> RiemannExact::sample(double xi) const {
  const double cl = std::sqrt(g_ * hl_), cr = std::sqrt(g_ * hr_);
  const double cs = std::sqrt(g_ * h_star_);

  if (xi <= u_star_) {
    // left wave
    if (h_star_ > hl_) { // shock, speed from the mass jump condition
      const double s = (h_star_ * u_star_ - hl_ * ul_) / (h_star_ - hl_);
      return xi < s ? std::make_pair(hl_, ul_) : std::make_pair(h_star_, u_star_);
    }
    const double head = ul_ - cl;
    const double tail = u_star_ - cs;
    if (xi <= head) return {hl_, ul_};
    if (xi >= tail) return {h_star_, u_star_};
    const double c = (ul_ + 2.0 * cl - xi) / 3.0;
    return {c * c / g_, xi + c};
  }
  // right wave
  if (h_star_ > hr_) {
    const double s = (h_star_ * u_star_ - hr_ * ur_) / (h_star_ - hr_);
    return xi > s ? std::make_pair(hr_, ur_) : std::make_pair(h_star_, u_star_);
  }
  const double head = ur_ + cr;
  const double tail = u_star_ + cs;
  if (xi >= head) return {hr_, ur_};
  if (xi <= tail) return {h_star_, u_star_};
  const double c = (xi - ur_ + 2.0 * cr) / 3.0;
  return {c * c / g_, xi - c};
}

KalmanResult kalman_oracle(const Eigen::MatrixXd& model, const Eigen::MatrixXd& obs_op,
                           const Eigen::MatrixXd& obs_cov, const Eigen::VectorXd& prior_mean,
                           const Eigen::MatrixXd& prior_cov,
                           const std::vector<std::pair<int, Eigen::VectorXd>>& obs_at_steps, int steps) {
  const Eigen::Index n = prior_mean.size();
  if (n > 100) throw std::invalid_argument("kalman_oracle: dense oracle limited to dimension 100");
  KalmanResult res;
  Eigen::VectorXd x = prior_mean;
  Eigen::MatrixXd p = prior_cov;

  std::size_t next = 0;
  auto maybe_update = [&](int k) {
    if (next >= obs_at_steps.size() || obs_at_steps[next].first != k) return;
    const Eigen::VectorXd& y = obs_at_steps[next].second;
    ++next;

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    // information form
    const Eigen::MatrixXd pinv = p.ldlt().solve(eye);
    const Eigen::MatrixXd rinv = obs_cov.ldlt().solve(Eigen::MatrixXd::Identity(obs_cov.rows(), obs_cov.rows()));
    const Eigen::MatrixXd pa_info = (pinv + obs_op.transpose() * rinv * obs_op).ldlt().solve(eye);
    const Eigen::MatrixXd k_info = pa_info * obs_op.transpose() * rinv;

    // Sherman-Morrison-Woodbury form
    const Eigen::MatrixXd s = obs_op * p * obs_op.transpose() + obs_cov;
    const Eigen::MatrixXd k_smw = s.ldlt().solve(obs_op * p).transpose();
    const Eigen::MatrixXd pa_smw = (eye - k_smw * obs_op) * p;

    res.gain_mismatch = std::max(res.gain_mismatch, (k_info - k_smw).cwiseAbs().maxCoeff());
    res.cov_mismatch = std::max(res.cov_mismatch, (pa_info - pa_smw).cwiseAbs().maxCoeff());

    x = x + k_smw * (y - obs_op * x);
    p = 0.5 * (pa_smw + pa_smw.transpose());
  };

  maybe_update(0);
  res.analysis_mean.push_back(x);
  res.analysis_cov.push_back(p);
  for (int k = 1; k <= steps; ++k) {
    x = model * x;
    p = model * p * model.transpose();
    maybe_update(k);
    res.analysis_mean.push_back(x);
    res.analysis_cov.push_back(p);
  }
  return res;
}

Eigen::MatrixXd dense_hessian_oracle(const IncrementalProblem& prob, bool preconditioned,
                                     double* max_asymmetry) {
  const int n = prob.dim();
  if (n > 8 * 8 * 3) throw std::invalid_argument("dense_hessian_oracle: grid too large");
  Eigen::MatrixXd h(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[k] = 1.0;
    h.col(k) = preconditioned ? prob.hess_apply(e) : prob.hess_apply_raw(e);
  }
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (max_asymmetry) *max_asymmetry = asym;
  return 0.5 * (h + h.transpose()).eval();
}

LinearToy make_advection_toy(int dim, double courant, int steps, int obs_every, std::uint64_t seed) {
  if (dim < 2 || dim > 50) throw std::invalid_argument("make_advection_toy: dim must be in [2, 50]");
  if (courant <= 0.0 || courant > 1.0) throw std::invalid_argument("make_advection_toy: courant in (0, 1]");
  LinearToy toy;
  toy.steps = steps;
  toy.model = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    toy.model(i, i) = 1.0 - courant;
    toy.model(i, (i + dim - 1) % dim) = courant; // periodic upwind
  }
  toy.obs_op = Eigen::MatrixXd::Zero((dim + 1) / 2, dim);
  for (int i = 0; i < toy.obs_op.rows(); ++i) toy.obs_op(i, 2 * i) = 1.0; // every other point
  toy.obs_cov = 0.04 * Eigen::MatrixXd::Identity(toy.obs_op.rows(), toy.obs_op.rows());

  // exponential kernel: mildly conditioned, so the dense-oracle comparisons
  // stay meaningful at tight tolerances
  toy.prior_cov.resize(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const int d = std::min(std::abs(i - j), dim - std::abs(i - j));
      toy.prior_cov(i, j) = 0.25 * std::exp(-d / 3.0);
    }

  SeededRng rng(seed, 42);
  toy.prior_mean.resize(dim);
  for (int i = 0; i < dim; ++i) toy.prior_mean[i] = std::sin(2.0 * M_PI * i / dim);
  // truth = prior mean + correlated draw
  Eigen::LLT<Eigen::MatrixXd> llt(toy.prior_cov);
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z[i] = rng.normal();
  Eigen::VectorXd truth = toy.prior_mean + llt.matrixL() * z;

  for (int k = 0; k <= steps; k += obs_every) {
    Eigen::VectorXd y = toy.obs_op * truth;
    for (int i = 0; i < y.size(); ++i) y[i] += 0.2 * rng.normal();
    toy.obs_at_steps.emplace_back(k, y);
    for (int s = 0; s < obs_every && k + s < steps; ++s) truth = toy.model * truth;
  }
  return toy;
}

Eigen::MatrixXd toy_4dvar_hessian(const LinearToy& toy) {
  const Eigen::Index n = toy.prior_mean.size();
  Eigen::MatrixXd hess = toy.prior_cov.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd rinv =
      toy.obs_cov.ldlt().solve(Eigen::MatrixXd::Identity(toy.obs_cov.rows(), toy.obs_cov.rows()));
  for (const auto& [k, y] : toy.obs_at_steps) {
    Eigen::MatrixXd mk = Eigen::MatrixXd::Identity(n, n);
    for (int s = 0; s < k; ++s) mk = toy.model * mk;
    const Eigen::MatrixXd hm = toy.obs_op * mk;
    hess += hm.transpose() * rinv * hm;
    (void)y;
  }
  return hess;
}

Eigen::VectorXd toy_4dvar_solve(const LinearToy& toy, int max_iter, double tol) {
  const Eigen::Index n = toy.prior_mean.size();
  const Eigen::MatrixXd hess = toy_4dvar_hessian(toy);
  Eigen::VectorXd b = toy.prior_cov.ldlt().solve(toy.prior_mean);
  const Eigen::MatrixXd rinv =
      toy.obs_cov.ldlt().solve(Eigen::MatrixXd::Identity(toy.obs_cov.rows(), toy.obs_cov.rows()));
  for (const auto& [k, y] : toy.obs_at_steps) {
    Eigen::MatrixXd mk = Eigen::MatrixXd::Identity(n, n);
    for (int s = 0; s < k; ++s) mk = toy.model * mk;
    b += (toy.obs_op * mk).transpose() * rinv * y;
  }
  const CgResult cg = conjugate_gradient([&](const Eigen::VectorXd& v) { return (hess * v).eval(); }, b,
                                         Eigen::VectorXd::Zero(n), max_iter, tol);
  return cg.x;
}

} // namespace dakit
