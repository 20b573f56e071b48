#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dakit/ensemble.hpp"
#include "dakit/grid.hpp"
#include "dakit/observation.hpp"
#include "dakit/trajectory.hpp"
#include "dakit/var4d_types.hpp"

namespace dakit {

/// Centered ensemble anomalies scaled by 1/sqrt(N-1); the empirical square
/// root of the background covariance. Columns sum to the zero field.
struct PerturbationMatrix {
  std::vector<Increment> cols;
  StateField mean;

  int size() const { return static_cast<int>(cols.size()); }
  /// B v = X' (X'^T v) without forming the covariance
  Increment covariance_apply(const Increment& v) const;
};

PerturbationMatrix anomalies(const Ensemble& ens);

/// Independent nonlinear forecasts of every member (optionally threaded);
/// t0 is always recorded. Checkpoints are not stored.
std::vector<Trajectory> propagate_ensemble(const Ensemble& ens, const GridSpec& grid, double t0, double tf,
                                           const std::vector<double>& record_times, double cfl = 0.5,
                                           int threads = 1);

enum class CorrelationKind { gaussian, gaspari_cohn };
CorrelationKind correlation_kind_from_string(const std::string& s);
std::string to_string(CorrelationKind k);

/// Isotropic correlation: Gaussian exp(-d^2 / 2L^2) hard-truncated at 2L, or
/// the fifth-order Gaspari-Cohn polynomial with support radius 2L.
double correlation_value(double d, CorrelationKind kind, double cutoff);

/// Truncated spectral square root C' = E_r Lambda_r^{1/2} of the grid-point
/// correlation matrix; shared across the three state components.
struct LocalizationBasis {
  CorrelationKind kind = CorrelationKind::gaspari_cohn;
  double cutoff = 0.0;
  int rank = 0;
  double energy_kept = 0.0; ///< fraction of the total (clipped) spectrum retained
  int clipped = 0;          ///< negative eigenvalues clipped to zero
  Eigen::MatrixXd modes;    ///< n_cells x rank, columns scaled by sqrt(eigenvalue)
};

/// Keep `modes` leading modes when modes > 0, otherwise the smallest count
/// reaching `energy` of the spectrum.
LocalizationBasis build_localization(const GridSpec& grid, CorrelationKind kind, double cutoff,
                                     double energy = 0.99, int modes = 0);

/// Square root of the (possibly localized) flow-dependent background
/// covariance at one instant, represented by the propagated member anomalies.
class SqrtB {
public:
  SqrtB(std::vector<Increment> cols, const LocalizationBasis* loc);

  int dim() const;
  int members() const { return static_cast<int>(cols_.size()); }

  Increment apply(const Eigen::VectorXd& z) const;
  Eigen::VectorXd apply_transpose(const Increment& w) const;

private:
  std::vector<Increment> cols_;
  const LocalizationBasis* loc_ = nullptr;
};

/// Anomalies of the propagated members at record time t (flow-dependent
/// surrogate for the tangent propagation of the initial anomalies).
SqrtB sqrtB_at(double t, const std::vector<Trajectory>& member_trajs, const LocalizationBasis* loc = nullptr);

/// Adjoint-free quadratic cost in the ensemble control space. All model
/// information enters through nonlinear member forecasts; no tangent or
/// adjoint model is used anywhere.
class EnProblem {
public:
  EnProblem(const Trajectory& outer, const std::vector<Trajectory>& member_trajs, const ObservationSet& obs,
            const LocalizationBasis* loc = nullptr);

  int dim() const { return dim_; }
  std::pair<double, Eigen::VectorXd> cost_grad(const Eigen::VectorXd& z) const;
  Eigen::VectorXd hess_apply(const Eigen::VectorXd& z) const;
  Eigen::VectorXd rhs() const; ///< -grad at z = 0
  double innovation_cost() const;

  /// increment in state space from the initial-time square root
  Increment analysis_increment(const Eigen::VectorXd& z) const;
  const SqrtB& sqrt_b_initial() const { return sqrtb_t0_; }

private:
  const Trajectory& outer_;
  const ObservationSet& obs_;
  std::vector<SqrtB> sqrtb_;
  SqrtB sqrtb_t0_;
  std::vector<std::vector<double>> innov_;
  int dim_ = 0;
};

/// Deterministic ensemble-transform update at one time; the symmetric square
/// root keeps the analysis anomalies summing to zero.
Ensemble etkf_update(const Ensemble& ens, const ObsMask& mask, const std::vector<double>& y,
                     const std::vector<double>& variance);

/// Stochastic update: every member assimilates independently perturbed
/// observations drawn from streams of `seed`.
Ensemble enkf_update_perturbed(const Ensemble& ens, const ObsMask& mask, const std::vector<double>& y,
                               const std::vector<double>& variance, std::uint64_t seed);

struct En4dvarOptions {
  int outer_iters = 1;
  int inner_iters = 100;
  double inner_tol = 1e-4;
  double cfl = 0.5;
  bool localization = false;
  CorrelationKind loc_kind = CorrelationKind::gaspari_cohn;
  double loc_cutoff = 0.0; ///< meters
  double loc_energy = 0.99;
  int loc_modes = 0; ///< explicit rank; 0 = use loc_energy
  enum class Update { enkf, etkf } update = Update::enkf;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct En4dvarWindow {
  double t0 = 0.0;
  double tf = 0.0;
  std::vector<std::size_t> obs_indices; ///< into the full observation set
};

struct En4dvarResult {
  std::vector<StateField> analyses;            ///< X0^a per window
  std::vector<Trajectory> analysis_trajectories;
  Ensemble final_ensemble;
  int loc_rank = 0;
  double loc_energy = 0.0;
  std::vector<CostReport> reports; ///< one per window and outer iteration
  bool converged = true;
  std::string message;
};

/// Cycled ensemble 4DVar: per window, propagate the ensemble, minimize the
/// adjoint-free cost by conjugate gradient, shift state and members by the
/// analysis increment, refresh the ensemble spread with an EnKF/ETKF update
/// at the window start, then forecast to the next window.
En4dvarResult run_en4dvar_cycle(const GridSpec& grid, const StateField& background, const Ensemble& init_ens,
                                const ObservationSet& all_obs, const std::vector<En4dvarWindow>& windows,
                                const En4dvarOptions& opt);

} // namespace dakit
