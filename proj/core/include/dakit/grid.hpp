#pragma once

#include <stdexcept>

namespace dakit {

/// Uniform rectangular cell-centered grid for the shallow-water model.
struct GridSpec {
  int nx = 0;            ///< cell count along x
  int ny = 0;            ///< cell count along y
  double dx = 0.0;       ///< cell size along x [m]
  double dy = 0.0;       ///< cell size along y [m]
  double gravity = 9.81; ///< gravitational acceleration [m/s^2]

  int cells() const { return nx * ny; }
  double length_x() const { return nx * dx; }
  double length_y() const { return ny * dy; }

  // cell centers
  double xc(int i) const { return (i + 0.5) * dx; }
  double yc(int j) const { return (j + 0.5) * dy; }

  void validate() const {
    if (nx < 3 || ny < 3) throw std::invalid_argument("GridSpec: nx and ny must be >= 3");
    if (dx <= 0 || dy <= 0) throw std::invalid_argument("GridSpec: dx and dy must be > 0");
    if (gravity <= 0) throw std::invalid_argument("GridSpec: gravity must be > 0");
  }

  bool same_shape(const GridSpec& o) const { return nx == o.nx && ny == o.ny; }
};

} // namespace dakit
