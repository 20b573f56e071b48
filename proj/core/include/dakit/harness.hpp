#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dakit/config.hpp"
#include "dakit/field.hpp"
#include "dakit/grid.hpp"
#include "dakit/observation.hpp"
#include "dakit/trajectory.hpp"

namespace dakit {

/// Geometry and perturbation law of the twin experiments. The background is
/// the ideal x-tilted plane at rest in both cases.
struct CaseParams {
  double depth = 0.05;           ///< mean water depth [m]
  double slope_x = 0.20;         ///< background tilt along x
  double case_b_slope_x = 0.21;  ///< truth tilt along x, case B
  double case_b_slope_y = 0.10;  ///< truth tilt along y, case B
  double grf_variance_h = 1.6e-6; ///< truth height perturbation variance [m^2], case A
  double grf_std_uv = 1e-3;      ///< truth velocity perturbation std [m/s]
  double corr_len_frac = 0.05;   ///< decorrelation length, fraction of the longer extent
};

struct TwinCase {
  StateField truth;
  StateField background;
};

/// Case 'A': truth = background plane + correlated Gaussian perturbations of
/// height and velocity. Case 'B': truth = plane with the case-B slopes plus
/// the velocity perturbation. Streams 100..102 of `seed` feed the draws.
TwinCase build_case(char which, const GridSpec& grid, const CaseParams& params, std::uint64_t seed);

enum class MaskKind { height, velocity, full };
MaskKind mask_kind_from_string(const std::string& s);
ObsMask make_mask(MaskKind kind, const GridSpec& grid);

/// Observations of the truth trajectory at its record times: noise stds per
/// observed quantity (a zero std means clean values with unit variance).
/// Noise uses stream 200 of `seed`.
ObservationSet make_observations(const Trajectory& truth, MaskKind kind, double sigma_h, double sigma_u,
                                 double sigma_v, std::uint64_t seed);

/// Observation-error inflation for partially valid data: valid points keep
/// sigma_o^2, invalid ones get (sigma_o (1 + growth d))^2 with d the grid
/// distance (in cells) to the nearest valid point.
ScalarField inflate_missing_obs_error(const std::vector<std::uint8_t>& valid, const GridSpec& grid,
                                      double sigma_o, double growth);

struct RmseSeries {
  std::vector<double> times;
  std::vector<double> h, u, v;

  double mean_h() const;
  double mean_u() const;
  double mean_v() const;
  double mean_velocity() const; ///< mean over times of sqrt((u^2+v^2)/2)
};

/// Per-record-time root-mean-square differences; velocities compared as
/// hu/h and hv/h.
RmseSeries rmse(const Trajectory& estimate, const Trajectory& truth);
void append_rmse(RmseSeries& into, const RmseSeries& tail);
void write_rmse_csv(const std::string& path, const RmseSeries& series);

/// Snapshot series on disk: <prefix>_0000.swf ... plus <prefix>_times.csv.
void write_state_series(const std::string& dir, const std::string& prefix, const GridSpec& grid,
                        const Trajectory& traj);
RmseSeries rmse_from_series(const std::string& estimate_prefix, const std::string& truth_prefix);

struct ExperimentSummary {
  RmseSeries series;
  std::string output_dir;
  int loc_rank = 0;
  double loc_energy = 0.0;
};

/// End-to-end twin experiment from a configuration: truth and observation
/// synthesis, the chosen assimilation (4dvar | en4dvar | none), RMSE series,
/// snapshots, CSV outputs and a replayable manifest, all under cfg "output".
ExperimentSummary run_experiment(const Config& cfg);

/// The fully resolved configuration (defaults filled in) that run_experiment
/// writes as `manifest.txt`.
Config resolve_experiment_config(const Config& cfg);

} // namespace dakit
