#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dakit/field.hpp"
#include "dakit/grid.hpp"

namespace dakit {

/// Linearization record for one model substep: the state the step started
/// from and the step size actually taken.
struct StepCheckpoint {
  double t = 0.0;
  double dt = 0.0;
  StateField state;
};

/// Time-indexed model trajectory. `times`/`states` hold the requested record
/// instants; `checkpoints` hold every substep in [t0, tf] when checkpointing
/// was enabled (required by the tangent/adjoint sweeps).
struct Trajectory {
  GridSpec grid;
  std::vector<double> times;
  std::vector<StateField> states;
  std::vector<StepCheckpoint> checkpoints;
  /// per record time: number of substeps taken from t0 up to that instant
  std::vector<std::size_t> steps_before;

  double t0() const { return times.front(); }
  double tf() const { return times.back(); }
  bool has_checkpoints() const { return !checkpoints.empty() || times.size() == 1; }

  std::size_t index_of_time(double t, double tol = 1e-9) const {
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - t) <= tol) return i;
    throw std::invalid_argument("Trajectory: time not recorded");
  }

  const StateField& state_at(double t) const { return states[index_of_time(t)]; }
};

} // namespace dakit
