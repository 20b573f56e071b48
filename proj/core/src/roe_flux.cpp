#include "dakit/roe.hpp"

#include "roe_internal.hpp"

namespace dakit {

Cons3 physical_flux(const Cons3& u, double gravity) {
  if (u[0] <= 0.0) throw std::domain_error("physical_flux: non-positive water height");
  const double un = u[1] / u[0];
  const double ut = u[2] / u[0];
  return {u[1], u[1] * un + 0.5 * gravity * u[0] * u[0], u[1] * ut};
}

Cons3 roe_flux(const Cons3& left, const Cons3& right, double gravity) {
  const detail::RoeWork w = detail::roe_work(left, right, gravity);
  Cons3 f;
  for (int k = 0; k < 3; ++k) {
    const double diss =
        w.q[0] * w.alpha[0] * w.r1[k] + w.q[1] * w.alpha[1] * w.r2[k] + w.q[2] * w.alpha[2] * w.r3[k];
    f[k] = 0.5 * (w.FL[k] + w.FR[k]) - 0.5 * diss;
  }
  return f;
}

} // namespace dakit
