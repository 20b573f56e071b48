#pragma once

#include <cmath>
#include <stdexcept>

#include "dakit/roe.hpp"

namespace dakit::detail {

/// Intermediates of the Roe flux evaluation at one interface. Recomputed
/// identically by the nonlinear, tangent and adjoint paths so the three stay
/// bit-consistent.
struct RoeWork {
  double hL, qnL, qtL, hR, qnR, qtR;
  double aL, aR;             // sqrt(h)
  double w2L, w3L, w2R, w3R; // u*sqrt(h), v*sqrt(h)
  double w1b, w2b, w3b;      // arithmetic means of w
  double d1, d2, d3;         // jumps of w
  double ubar, cbar;
  double c[3];
  double num, den, beta, t3;
  double alpha[3];
  double smax, delta;
  bool fix[3];
  double sgn_c[3], sgn_u;
  double q[3];
  double uL, vL, uR, vR;
  double FL[3], FR[3];
  double r1[3], r2[3], r3[3];
};

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline RoeWork roe_work(const Cons3& l, const Cons3& r, double g) {
  RoeWork w{};
  w.hL = l[0];
  w.qnL = l[1];
  w.qtL = l[2];
  w.hR = r[0];
  w.qnR = r[1];
  w.qtR = r[2];
  if (w.hL <= 0.0 || w.hR <= 0.0) throw std::domain_error("roe_flux: non-positive water height");

  w.aL = std::sqrt(w.hL);
  w.aR = std::sqrt(w.hR);
  w.w2L = w.qnL / w.aL;
  w.w3L = w.qtL / w.aL;
  w.w2R = w.qnR / w.aR;
  w.w3R = w.qtR / w.aR;

  w.w1b = 0.5 * (w.aL + w.aR);
  w.w2b = 0.5 * (w.w2L + w.w2R);
  w.w3b = 0.5 * (w.w3L + w.w3R);
  w.d1 = w.aR - w.aL;
  w.d2 = w.w2R - w.w2L;
  w.d3 = w.w3R - w.w3L;

  w.ubar = w.w2b / w.w1b;
  w.cbar = std::sqrt(0.5 * g * (w.hL + w.hR));
  w.c[0] = w.ubar - w.cbar;
  w.c[1] = w.ubar;
  w.c[2] = w.ubar + w.cbar;

  w.num = w.w1b * w.d2 - w.w2b * w.d1;
  w.den = 2.0 * w.w1b * w.cbar;
  w.beta = w.num / w.den;
  w.alpha[0] = w.d1 - w.beta;
  w.t3 = w.w3b / w.w1b;
  w.alpha[1] = w.d3 - w.t3 * w.d1;
  w.alpha[2] = w.d1 + w.beta;

  w.smax = std::fabs(w.ubar) + w.cbar;
  w.delta = 0.05 * w.smax;
  w.sgn_u = sgn(w.ubar);
  for (int i = 0; i < 3; ++i) {
    const double a = std::fabs(w.c[i]);
    w.sgn_c[i] = sgn(w.c[i]);
    w.fix[i] = a < w.delta;
    w.q[i] = w.fix[i] ? w.c[i] * w.c[i] / (2.0 * w.delta) + 0.5 * w.delta : a;
  }

  w.uL = w.qnL / w.hL;
  w.vL = w.qtL / w.hL;
  w.uR = w.qnR / w.hR;
  w.vR = w.qtR / w.hR;
  w.FL[0] = w.qnL;
  w.FL[1] = w.qnL * w.uL + 0.5 * g * w.hL * w.hL;
  w.FL[2] = w.qnL * w.vL;
  w.FR[0] = w.qnR;
  w.FR[1] = w.qnR * w.uR + 0.5 * g * w.hR * w.hR;
  w.FR[2] = w.qnR * w.vR;

  w.r1[0] = w.w1b;
  w.r1[1] = w.w2b - w.w1b * w.cbar;
  w.r1[2] = w.w3b;
  w.r2[0] = 0.0;
  w.r2[1] = 0.0;
  w.r2[2] = w.w1b;
  w.r3[0] = w.w1b;
  w.r3[1] = w.w2b + w.w1b * w.cbar;
  w.r3[2] = w.w3b;
  return w;
}

} // namespace dakit::detail
