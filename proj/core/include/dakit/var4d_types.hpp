#pragma once

namespace dakit {

/// Cost breakdown of one (outer) iteration. total = background + observation.
struct CostReport {
  double total = 0.0;
  double background = 0.0;
  double observation = 0.0;
  double grad_norm = 0.0;
  int inner_iterations = 0;
};

struct AssimilationWindow {
  double t0 = 0.0;
  double tf = 0.0;
  double cfl = 0.5;
};

} // namespace dakit
