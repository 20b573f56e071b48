#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace dakit {

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  double residual_ratio = 0.0;
};

/// Conjugate gradient for SPD systems A x = b with A given as an operator.
/// Stops when ||r|| / ||b|| <= tol (immediately, with 0 iterations, if the
/// start is already optimal) or after max_iter iterations.
CgResult conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_a,
                            const Eigen::VectorXd& b, const Eigen::VectorXd& x0, int max_iter, double tol);

struct LbfgsOptions {
  int max_iter = 100;
  int memory = 8;
  double grad_tol = 1e-8;   // on ||g|| / max(1, ||g0||)
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Limited-memory BFGS with a strong-Wolfe line search. `fg` returns the
/// objective value and fills the gradient. On a line-search failure the last
/// iterate is returned with converged = false.
LbfgsResult lbfgs_minimize(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
                           const Eigen::VectorXd& x0, const LbfgsOptions& opt = {});

} // namespace dakit
