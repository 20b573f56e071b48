#include "dakit/en4dvar.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dakit/rng.hpp"

namespace dakit {

namespace {

Eigen::MatrixXd state_matrix(const Ensemble& ens) {
  const int n = ens.size();
  Eigen::MatrixXd x(3 * ens.members.front().h.size(), n);
  for (int i = 0; i < n; ++i) x.col(i) = flatten(ens.members[i]);
  return x;
}

Eigen::MatrixXd obs_matrix(const Ensemble& ens, const ObsMask& mask) {
  const int n = ens.size();
  Eigen::MatrixXd y(mask.count(), n);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> hx = observe(ens.members[i], mask);
    for (std::size_t k = 0; k < hx.size(); ++k) y(static_cast<Eigen::Index>(k), i) = hx[k];
  }
  return y;
}

} // namespace

Ensemble etkf_update(const Ensemble& ens, const ObsMask& mask, const std::vector<double>& y,
                     const std::vector<double>& variance) {
  ens.validate();
  const int n = ens.size();
  const int q = mask.count();
  if (static_cast<int>(y.size()) != q || static_cast<int>(variance.size()) != q)
    throw std::invalid_argument("etkf_update: packed observation size mismatch");

  const Eigen::MatrixXd x = state_matrix(ens);
  const Eigen::VectorXd xbar = x.rowwise().mean();
  const Eigen::MatrixXd xf = x.colwise() - xbar; // raw anomalies

  const Eigen::MatrixXd hy = obs_matrix(ens, mask);
  const Eigen::VectorXd ybar = hy.rowwise().mean();
  const Eigen::MatrixXd s = hy.colwise() - ybar; // raw observation anomalies

  Eigen::VectorXd rinv(q), d(q);
  for (int k = 0; k < q; ++k) {
    rinv[k] = 1.0 / variance[k];
    d[k] = y[k] - ybar[k];
  }

  // A = [(n-1)(I + S^T R^-1 S)]^{-1/2}, symmetric; keeps anomaly sums at zero
  const Eigen::MatrixXd inner =
      static_cast<double>(n - 1) *
      (Eigen::MatrixXd::Identity(n, n) + s.transpose() * rinv.asDiagonal() * s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
  if (es.info() != Eigen::Success) throw std::runtime_error("etkf_update: eigensolver failed");
  const Eigen::VectorXd lam = es.eigenvalues();
  for (int k = 0; k < n; ++k)
    if (lam[k] <= 0.0) throw std::runtime_error("etkf_update: inner matrix not positive definite");
  const Eigen::MatrixXd a =
      es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();

  const Eigen::VectorXd w = a * (a * (s.transpose() * (rinv.asDiagonal() * d)));
  const Eigen::VectorXd mean_a = xbar + xf * w;
  const Eigen::MatrixXd anom_a = std::sqrt(static_cast<double>(n - 1)) * (xf * a);

  Ensemble out = ens;
  const int nx = ens.members.front().nx(), ny = ens.members.front().ny();
  for (int i = 0; i < n; ++i) out.members[i] = unflatten_state(mean_a + anom_a.col(i), nx, ny);
  return out;
}

Ensemble enkf_update_perturbed(const Ensemble& ens, const ObsMask& mask, const std::vector<double>& y,
                               const std::vector<double>& variance, std::uint64_t seed) {
  ens.validate();
  const int n = ens.size();
  const int q = mask.count();
  if (static_cast<int>(y.size()) != q || static_cast<int>(variance.size()) != q)
    throw std::invalid_argument("enkf_update_perturbed: packed observation size mismatch");

  const double scale = 1.0 / std::sqrt(static_cast<double>(n - 1));
  const Eigen::MatrixXd x = state_matrix(ens);
  const Eigen::VectorXd xbar = x.rowwise().mean();
  const Eigen::MatrixXd xp = (x.colwise() - xbar) * scale;

  const Eigen::MatrixXd hy = obs_matrix(ens, mask);
  const Eigen::VectorXd ybar = hy.rowwise().mean();
  const Eigen::MatrixXd sp = (hy.colwise() - ybar) * scale;

  Eigen::MatrixXd c = sp * sp.transpose();
  for (int k = 0; k < q; ++k) c(k, k) += variance[k];
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(c); // semidefinite-tolerant
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("enkf_update_perturbed: innovation covariance factorization failed");

  Ensemble out = ens;
  const int nx = ens.members.front().nx(), ny = ens.members.front().ny();
  for (int i = 0; i < n; ++i) {
    SeededRng rng(seed, 0x7000ULL + static_cast<std::uint64_t>(i));
    Eigen::VectorXd yi(q);
    for (int k = 0; k < q; ++k) yi[k] = y[k] + std::sqrt(variance[k]) * rng.normal();
    const Eigen::VectorXd rhs = yi - hy.col(i);
    const Eigen::VectorXd t = ldlt.solve(rhs);
    const Eigen::VectorXd xa = x.col(i) + xp * (sp.transpose() * t);
    out.members[i] = unflatten_state(xa, nx, ny);
  }
  return out;
}

} // namespace dakit
