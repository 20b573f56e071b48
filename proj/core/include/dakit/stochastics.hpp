#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Core>

#include "dakit/ensemble.hpp"
#include "dakit/grid.hpp"
#include "dakit/observation.hpp"
#include "dakit/rng.hpp"

namespace dakit {

/// Gaussian random fields with covariance sigma^2 exp(-|x-y| / L) on the
/// grid, drawn through a dense symmetric factorization (desk-scale grids).
class GrfSampler {
public:
  GrfSampler(const GridSpec& grid, double variance, double corr_len_m);

  /// One zero-mean draw; always consumes one normal per cell so streams stay
  /// aligned whatever the variance.
  ScalarField sample(SeededRng& rng) const;

  bool jittered() const { return jittered_; }

private:
  int nx_ = 0, ny_ = 0;
  bool zero_ = false;
  bool jittered_ = false;
  Eigen::MatrixXd factor_;
};

ScalarField sample_grf(const GridSpec& grid, double variance, double corr_len_m, SeededRng& rng);

/// Members = background + independent GRF draws per component (height
/// variance var_h, velocity std sqrt(var_uv) applied to u and v). Member i
/// draws from stream i of the given seed.
Ensemble make_ensemble_gauss(const StateField& background, const GridSpec& grid, int n, double var_h,
                             double var_uv, double corr_len_m, std::uint64_t seed);

/// Members are planar free surfaces with slopes drawn uniformly from the
/// given ranges (fractions), re-centered so the ensemble mean equals the
/// background exactly; momenta start at zero.
Ensemble make_ensemble_para(const StateField& background, const GridSpec& grid, int n,
                            std::pair<double, double> slope_x_range, std::pair<double, double> slope_y_range,
                            std::uint64_t seed);

/// Advance every member a few nonlinear steps so the velocity perturbations
/// become dynamically consistent.
Ensemble balance_ensemble(const Ensemble& ens, const GridSpec& grid, int n_steps, double cfl = 0.5);

/// Adds N(0, variance) noise to every packed value; deterministic under seed.
ObservationSet perturb_observations(const ObservationSet& clean, std::uint64_t seed);

} // namespace dakit
