#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dakit/field.hpp"
#include "dakit/grid.hpp"
#include "dakit/observation.hpp"
#include "dakit/trajectory.hpp"
#include "dakit/var4d_types.hpp"

namespace dakit {

/// Prior on the initial condition: mean state and a diagonal error
/// covariance with one variance field per conserved component.
struct BackgroundModel {
  StateField mean;
  ScalarField var_h, var_hu, var_hv;

  BackgroundModel() = default;
  BackgroundModel(StateField mean_, double vh, double vhu, double vhv);

  const ScalarField& var(int c) const { return c == 0 ? var_h : (c == 1 ? var_hu : var_hv); }
  void validate() const;

  Increment apply_b_inv(const Increment& d) const;
  Increment apply_b_sqrt(const Increment& d) const; // elementwise square root
  double min_variance() const;
  double max_variance() const;
};

/// Full nonlinear cost: background Mahalanobis term plus the observation
/// misfit summed over observation instants. When `schedule` is given the
/// integration reuses its substep sequence.
CostReport cost_full(const GridSpec& grid, const AssimilationWindow& win, const BackgroundModel& bg,
                     const ObservationSet& obs, const StateField& x0, const Trajectory* schedule = nullptr);

/// Cost and its gradient with respect to the initial condition, the gradient
/// assembled from one backward adjoint sweep.
std::pair<CostReport, Increment> cost_grad_full(const GridSpec& grid, const AssimilationWindow& win,
                                                const BackgroundModel& bg, const ObservationSet& obs,
                                                const StateField& x0, const Trajectory* schedule = nullptr);

/// Quadratic inner problem of incremental 4DVar about an outer trajectory,
/// preconditioned by the control variable transform dx = B^{1/2} dz.
class IncrementalProblem {
public:
  IncrementalProblem(const Trajectory& outer, const BackgroundModel& bg, const ObservationSet& obs);

  int dim() const { return dim_; }

  /// J(dz) and grad J(dz); exactly quadratic in dz.
  std::pair<double, Eigen::VectorXd> cost_grad(const Eigen::VectorXd& dz) const;
  double cost(const Eigen::VectorXd& dz) const { return cost_grad(dz).first; }

  /// Hessian-vector products: preconditioned (identity + ensemble of sweeps)
  /// and raw (B^{-1} + sweeps), the latter for conditioning studies.
  Eigen::VectorXd hess_apply(const Eigen::VectorXd& dz) const;
  Eigen::VectorXd hess_apply_raw(const Eigen::VectorXd& dx) const;

  /// Right-hand side b of H dz = b (equals -grad at dz = 0).
  Eigen::VectorXd rhs() const;

  Increment to_state_increment(const Eigen::VectorXd& dz) const;

  /// Observation part of the cost at dz = 0 (half the weighted innovation norm).
  double innovation_cost() const;

  const Trajectory& outer() const { return outer_; }

private:
  const Trajectory& outer_;
  const BackgroundModel& bg_;
  const ObservationSet& obs_;
  std::vector<std::vector<double>> innov_;
  int dim_ = 0;
};

struct Var4dOptions {
  enum class Mode { incremental, full };
  Mode mode = Mode::incremental;
  int outer_iters = 3;
  int inner_iters = 50;
  double inner_tol = 1e-4;
  double cfl = 0.5;
};

struct Var4dResult {
  StateField analysis;
  Trajectory trajectory; ///< analysis trajectory over the window
  std::vector<CostReport> reports;
  bool converged = false;
  std::string message;
};

/// Incremental (Gauss-Newton, CG inner loop) or full (L-BFGS) 4DVar over one
/// window. In incremental mode the linearization state is updated and the
/// increment re-penalized toward zero each outer iteration; the reported
/// total cost uses the original background and must not increase.
Var4dResult run_4dvar(const GridSpec& grid, const AssimilationWindow& win, const BackgroundModel& bg,
                      const ObservationSet& obs, const Var4dOptions& opt = {});

struct ConditioningReport {
  double kappa_raw = 0.0;
  double kappa_preconditioned = 0.0;
  double bound = 0.0; ///< kappa(B) (1 + sigma^-1 lambda_min(B) max_t lambda_max(C_t) N_obs)
  int dim = 0;
};

/// Dense condition numbers of the incremental Hessian with and without the
/// CVT, plus the analytic bound. Requires a fully observed state, uniform
/// observation variance and a grid of at most 8x8 cells.
ConditioningReport hessian_conditioning_report(const GridSpec& grid, const AssimilationWindow& win,
                                               const BackgroundModel& bg, const ObservationSet& obs);

} // namespace dakit
