#pragma once

#include <string>
#include <utility>

#include "dakit/field.hpp"
#include "dakit/grid.hpp"

namespace dakit {

/// Binary state snapshot, little endian:
///   magic "SWF1", u32 nx, u32 ny, f64 dx, f64 dy, f64 g,
///   then h, hu, hv, each nx*ny row-major f64.
void write_state_swf1(const std::string& path, const GridSpec& grid, const StateField& s);
std::pair<GridSpec, StateField> read_state_swf1(const std::string& path);

/// CSV export with header x,y,h,hu,hv (cell centers, row-major).
void write_state_csv(const std::string& path, const GridSpec& grid, const StateField& s);

/// %.17g formatting so round-trips and byte comparisons are exact.
std::string format_full(double v);

} // namespace dakit
