#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dakit/var4d.hpp"

namespace dakit {

/// Exact solution of the 1D shallow-water Riemann problem for wet states
/// (two waves, each a shock or rarefaction; height iterated by Newton).
class RiemannExact {
public:
  RiemannExact(double hl, double ul, double hr, double ur, double gravity);

  double h_star() const { return h_star_; }
  double u_star() const { return u_star_; }

  /// self-similar solution sampled at xi = x/t: (h, u)
  std::pair<double, double> sample(double xi) const;

private:
  double hl_, ul_, hr_, ur_, g_;
  double h_star_ = 0.0, u_star_ = 0.0;
};

/// Linear Kalman filter over a fixed step schedule, run with both gain
/// forms (information and Sherman-Morrison-Woodbury); their largest
/// disagreement over the run is recorded.
struct KalmanResult {
  std::vector<Eigen::VectorXd> analysis_mean; ///< per step 0..steps
  std::vector<Eigen::MatrixXd> analysis_cov;
  double gain_mismatch = 0.0;
  double cov_mismatch = 0.0;
};

KalmanResult kalman_oracle(const Eigen::MatrixXd& model, const Eigen::MatrixXd& obs_op,
                           const Eigen::MatrixXd& obs_cov, const Eigen::VectorXd& prior_mean,
                           const Eigen::MatrixXd& prior_cov,
                           const std::vector<std::pair<int, Eigen::VectorXd>>& obs_at_steps, int steps);

/// Dense incremental Hessian assembled column-by-column from Hessian-vector
/// products (CVT-preconditioned when `preconditioned`). The worst asymmetry
/// found is reported before symmetrizing.
Eigen::MatrixXd dense_hessian_oracle(const IncrementalProblem& prob, bool preconditioned,
                                     double* max_asymmetry = nullptr);

/// Periodic 1D linear-advection fixture (first-order upwind matrix powers)
/// for the linear-case equivalence checks.
struct LinearToy {
  Eigen::MatrixXd model;    ///< one-step matrix
  Eigen::MatrixXd obs_op;
  Eigen::MatrixXd obs_cov;
  Eigen::MatrixXd prior_cov;
  Eigen::VectorXd prior_mean;
  std::vector<std::pair<int, Eigen::VectorXd>> obs_at_steps;
  int steps = 0;
};

/// Builds the fixture with a Gaussian-correlated prior, a randomly drawn
/// truth, and noisy partial observations (deterministic under seed).
LinearToy make_advection_toy(int dim, double courant, int steps, int obs_every, std::uint64_t seed);

/// Dense 4DVar normal equations for the toy, solved with the same conjugate
/// gradient used by the incremental inner loop.
Eigen::VectorXd toy_4dvar_solve(const LinearToy& toy, int max_iter = 2000, double tol = 1e-14);
Eigen::MatrixXd toy_4dvar_hessian(const LinearToy& toy);

} // namespace dakit
