#include "dakit/roe.hpp"

#include "roe_internal.hpp"

// Line-by-line tangent and adjoint of the Roe flux in roe_internal.hpp.
// The adjoint reverses the tangent statement by statement, so the two are
// exact transposes of each other in floating point. Modulus and entropy-fix
// branches are frozen at the linearization point.

namespace dakit {

using detail::RoeWork;

Cons3 roe_flux_tangent(const Cons3& left, const Cons3& right, const Cons3& dleft, const Cons3& dright,
                       double g) {
  const RoeWork w = detail::roe_work(left, right, g);

  const double dhL = dleft[0], dqnL = dleft[1], dqtL = dleft[2];
  const double dhR = dright[0], dqnR = dright[1], dqtR = dright[2];

  const double daL = dhL / (2.0 * w.aL);
  const double daR = dhR / (2.0 * w.aR);
  const double dw2L = (dqnL - w.w2L * daL) / w.aL;
  const double dw3L = (dqtL - w.w3L * daL) / w.aL;
  const double dw2R = (dqnR - w.w2R * daR) / w.aR;
  const double dw3R = (dqtR - w.w3R * daR) / w.aR;

  const double dw1b = 0.5 * (daL + daR);
  const double dw2b = 0.5 * (dw2L + dw2R);
  const double dw3b = 0.5 * (dw3L + dw3R);
  const double dd1 = daR - daL;
  const double dd2 = dw2R - dw2L;
  const double dd3 = dw3R - dw3L;

  const double dubar = (dw2b - w.ubar * dw1b) / w.w1b;
  const double dcbar = 0.25 * g * (dhL + dhR) / w.cbar;
  const double dc[3] = {dubar - dcbar, dubar, dubar + dcbar};

  const double dnum = dw1b * w.d2 + w.w1b * dd2 - dw2b * w.d1 - w.w2b * dd1;
  const double dden = 2.0 * (dw1b * w.cbar + w.w1b * dcbar);
  const double dbeta = (dnum - w.beta * dden) / w.den;
  const double dalpha0 = dd1 - dbeta;
  const double dt3 = (dw3b - w.t3 * dw1b) / w.w1b;
  const double dalpha1 = dd3 - dt3 * w.d1 - w.t3 * dd1;
  const double dalpha2 = dd1 + dbeta;

  const double dsmax = w.sgn_u * dubar + dcbar;
  const double ddelta = 0.05 * dsmax;
  double dq[3];
  for (int i = 0; i < 3; ++i)
    dq[i] = w.fix[i] ? (w.c[i] / w.delta) * dc[i] + (0.5 - w.c[i] * w.c[i] / (2.0 * w.delta * w.delta)) * ddelta
                     : w.sgn_c[i] * dc[i];

  const double duL = (dqnL - w.uL * dhL) / w.hL;
  const double dvL = (dqtL - w.vL * dhL) / w.hL;
  const double duR = (dqnR - w.uR * dhR) / w.hR;
  const double dvR = (dqtR - w.vR * dhR) / w.hR;
  const double dFL[3] = {dqnL, dqnL * w.uL + w.qnL * duL + g * w.hL * dhL, dqnL * w.vL + w.qnL * dvL};
  const double dFR[3] = {dqnR, dqnR * w.uR + w.qnR * duR + g * w.hR * dhR, dqnR * w.vR + w.qnR * dvR};

  const double dr1[3] = {dw1b, dw2b - dw1b * w.cbar - w.w1b * dcbar, dw3b};
  const double dr2[3] = {0.0, 0.0, dw1b};
  const double dr3[3] = {dw1b, dw2b + dw1b * w.cbar + w.w1b * dcbar, dw3b};

  Cons3 df;
  for (int k = 0; k < 3; ++k) {
    const double diss = dq[0] * w.alpha[0] * w.r1[k] + w.q[0] * dalpha0 * w.r1[k] + w.q[0] * w.alpha[0] * dr1[k] +
                        dq[1] * w.alpha[1] * w.r2[k] + w.q[1] * dalpha1 * w.r2[k] + w.q[1] * w.alpha[1] * dr2[k] +
                        dq[2] * w.alpha[2] * w.r3[k] + w.q[2] * dalpha2 * w.r3[k] + w.q[2] * w.alpha[2] * dr3[k];
    df[k] = 0.5 * (dFL[k] + dFR[k]) - 0.5 * diss;
  }
  return df;
}

void roe_flux_adjoint(const Cons3& left, const Cons3& right, const Cons3& fbar, double g, Cons3& lbar,
                      Cons3& rbar) {
  const RoeWork w = detail::roe_work(left, right, g);

  double FLbar[3] = {0, 0, 0}, FRbar[3] = {0, 0, 0};
  double r1bar[3], r2bar[3], r3bar[3];
  double qbar[3] = {0, 0, 0};
  double alphabar[3] = {0, 0, 0};
  double cibar[3] = {0, 0, 0};
  double w1bbar = 0, w2bbar = 0, w3bbar = 0;
  double cbarbar = 0, ubarbar = 0;
  double numbar = 0, denbar = 0, betabar = 0, t3bar = 0;
  double dd1bar = 0, dd2bar = 0, dd3bar = 0;
  double smaxbar = 0, deltabar = 0;
  double uLbar = 0, vLbar = 0, uRbar = 0, vRbar = 0;
  double aLbar = 0, aRbar = 0;
  double w2Lbar = 0, w3Lbar = 0, w2Rbar = 0, w3Rbar = 0;
  double hLbar = 0, qnLbar = 0, qtLbar = 0, hRbar = 0, qnRbar = 0, qtRbar = 0;

  // reverse of the final flux assembly
  for (int k = 0; k < 3; ++k) {
    const double fb = fbar[k];
    FLbar[k] += 0.5 * fb;
    FRbar[k] += 0.5 * fb;
    qbar[0] += -0.5 * w.alpha[0] * w.r1[k] * fb;
    alphabar[0] += -0.5 * w.q[0] * w.r1[k] * fb;
    r1bar[k] = -0.5 * w.q[0] * w.alpha[0] * fb;
    qbar[1] += -0.5 * w.alpha[1] * w.r2[k] * fb;
    alphabar[1] += -0.5 * w.q[1] * w.r2[k] * fb;
    r2bar[k] = -0.5 * w.q[1] * w.alpha[1] * fb;
    qbar[2] += -0.5 * w.alpha[2] * w.r3[k] * fb;
    alphabar[2] += -0.5 * w.q[2] * w.r3[k] * fb;
    r3bar[k] = -0.5 * w.q[2] * w.alpha[2] * fb;
  }

  // reverse of dr3 / dr2 / dr1
  w1bbar += r3bar[0] + w.cbar * r3bar[1];
  w2bbar += r3bar[1];
  cbarbar += w.w1b * r3bar[1];
  w3bbar += r3bar[2];
  w1bbar += r2bar[2];
  w1bbar += r1bar[0] - w.cbar * r1bar[1];
  w2bbar += r1bar[1];
  cbarbar += -w.w1b * r1bar[1];
  w3bbar += r1bar[2];

  // reverse of the physical flux perturbations
  qnRbar += FRbar[0] + w.uR * FRbar[1] + w.vR * FRbar[2];
  uRbar += w.qnR * FRbar[1];
  hRbar += g * w.hR * FRbar[1];
  vRbar += w.qnR * FRbar[2];
  qnLbar += FLbar[0] + w.uL * FLbar[1] + w.vL * FLbar[2];
  uLbar += w.qnL * FLbar[1];
  hLbar += g * w.hL * FLbar[1];
  vLbar += w.qnL * FLbar[2];
  qtRbar += vRbar / w.hR;
  hRbar += -w.vR * vRbar / w.hR;
  qnRbar += uRbar / w.hR;
  hRbar += -w.uR * uRbar / w.hR;
  qtLbar += vLbar / w.hL;
  hLbar += -w.vL * vLbar / w.hL;
  qnLbar += uLbar / w.hL;
  hLbar += -w.uL * uLbar / w.hL;

  // reverse of the entropy-fixed moduli
  for (int i = 0; i < 3; ++i) {
    if (w.fix[i]) {
      cibar[i] += (w.c[i] / w.delta) * qbar[i];
      deltabar += (0.5 - w.c[i] * w.c[i] / (2.0 * w.delta * w.delta)) * qbar[i];
    } else {
      cibar[i] += w.sgn_c[i] * qbar[i];
    }
  }
  smaxbar += 0.05 * deltabar;
  ubarbar += w.sgn_u * smaxbar;
  cbarbar += smaxbar;

  // reverse of the wave strengths
  dd1bar += alphabar[2];
  betabar += alphabar[2];
  dd3bar += alphabar[1];
  t3bar += -w.d1 * alphabar[1];
  dd1bar += -w.t3 * alphabar[1];
  w3bbar += t3bar / w.w1b;
  w1bbar += -w.t3 * t3bar / w.w1b;
  dd1bar += alphabar[0];
  betabar += -alphabar[0];
  numbar += betabar / w.den;
  denbar += -w.beta * betabar / w.den;
  w1bbar += 2.0 * w.cbar * denbar;
  cbarbar += 2.0 * w.w1b * denbar;
  w1bbar += w.d2 * numbar;
  dd2bar += w.w1b * numbar;
  w2bbar += -w.d1 * numbar;
  dd1bar += -w.w2b * numbar;

  // reverse of the eigenvalues and averages
  ubarbar += cibar[0] + cibar[1] + cibar[2];
  cbarbar += cibar[2] - cibar[0];
  hLbar += 0.25 * g * cbarbar / w.cbar;
  hRbar += 0.25 * g * cbarbar / w.cbar;
  w2bbar += ubarbar / w.w1b;
  w1bbar += -w.ubar * ubarbar / w.w1b;

  // reverse of the jumps and means of w
  w3Rbar += dd3bar;
  w3Lbar -= dd3bar;
  w2Rbar += dd2bar;
  w2Lbar -= dd2bar;
  aRbar += dd1bar;
  aLbar -= dd1bar;
  w3Lbar += 0.5 * w3bbar;
  w3Rbar += 0.5 * w3bbar;
  w2Lbar += 0.5 * w2bbar;
  w2Rbar += 0.5 * w2bbar;
  aLbar += 0.5 * w1bbar;
  aRbar += 0.5 * w1bbar;

  // reverse of the w variables
  qtRbar += w3Rbar / w.aR;
  aRbar += -w.w3R * w3Rbar / w.aR;
  qnRbar += w2Rbar / w.aR;
  aRbar += -w.w2R * w2Rbar / w.aR;
  qtLbar += w3Lbar / w.aL;
  aLbar += -w.w3L * w3Lbar / w.aL;
  qnLbar += w2Lbar / w.aL;
  aLbar += -w.w2L * w2Lbar / w.aL;
  hRbar += aRbar / (2.0 * w.aR);
  hLbar += aLbar / (2.0 * w.aL);

  lbar[0] += hLbar;
  lbar[1] += qnLbar;
  lbar[2] += qtLbar;
  rbar[0] += hRbar;
  rbar[1] += qnRbar;
  rbar[2] += qtRbar;
}

} // namespace dakit
