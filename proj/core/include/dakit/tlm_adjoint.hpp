#pragma once

#include <utility>
#include <vector>

#include "dakit/field.hpp"
#include "dakit/swe.hpp"
#include "dakit/trajectory.hpp"

namespace dakit {

/// Exact linearization of one model step about the recorded pre-step state.
/// Upwind and entropy-fix switches are frozen at the checkpoint.
TangentState tlm_step(const StateField& checkpoint, const GridSpec& grid, double dt, const TangentState& d);

/// Exact transpose of tlm_step in the unweighted grid inner product.
AdjointState adjoint_step(const StateField& checkpoint, const GridSpec& grid, double dt, const AdjointState& lambda);

/// Forward composition of tlm_step along the trajectory checkpoints up to t.
TangentState tlm_sweep(const Trajectory& traj, const TangentState& d0, double t);

/// Single forward pass returning the tangent state at each requested record time.
std::vector<TangentState> tlm_sweep_collect(const Trajectory& traj, const TangentState& d0,
                                            const std::vector<double>& times);

/// Backward composition with zero terminal condition, injecting each forcing
/// at its (record) time; returns the adjoint state at t0. Forcing times must
/// be non-decreasing.
AdjointState adjoint_sweep(const Trajectory& traj, const std::vector<std::pair<double, AdjointState>>& forcings);

} // namespace dakit
