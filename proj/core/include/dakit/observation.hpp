#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dakit/field.hpp"
#include "dakit/grid.hpp"
#include "dakit/trajectory.hpp"

namespace dakit {

/// Which state components are observed, per grid point. Component order is
/// h, u, v; velocities are observed as hu/h and hv/h. Packed observation
/// vectors list the selected points component-major, row-major within each.
struct ObsMask {
  int nx = 0, ny = 0;
  std::array<std::vector<std::uint8_t>, 3> sel;

  ObsMask() = default;
  ObsMask(int nx_, int ny_, bool h_on, bool u_on, bool v_on);

  static ObsMask full(const GridSpec& g) { return ObsMask(g.nx, g.ny, true, true, true); }
  static ObsMask height_only(const GridSpec& g) { return ObsMask(g.nx, g.ny, true, false, false); }
  static ObsMask velocity_only(const GridSpec& g) { return ObsMask(g.nx, g.ny, false, true, true); }

  int count() const;
  bool component_on(int c) const;
  bool uniform_full() const; // every point of every component observed
};

/// Observation instants, mask, packed values and packed error variances.
/// Variances are per point and shared across times.
struct ObservationSet {
  std::vector<double> times;
  ObsMask mask;
  std::vector<std::vector<double>> values;
  std::vector<double> variance;

  void validate() const;
};

/// H(X): packed observed quantities (h, hu/h, hv/h at the masked points).
std::vector<double> observe(const StateField& s, const ObsMask& mask);

/// Linearization of H about s applied to an increment.
std::vector<double> observe_tangent(const StateField& s, const ObsMask& mask, const Increment& d);

/// Transpose of observe_tangent: accumulates packed weights into an increment.
void observe_adjoint(const StateField& s, const ObsMask& mask, const std::vector<double>& w, Increment& out);

/// D(t) = Y(t) - H(X(t)) at each observation time along the trajectory.
std::vector<std::vector<double>> innovation(const Trajectory& traj, const ObservationSet& obs);

/// Plain-text observation file (self describing; full double precision).
void write_observations(const std::string& path, const ObservationSet& obs);
ObservationSet read_observations(const std::string& path);

} // namespace dakit
