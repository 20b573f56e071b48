#pragma once

#include <array>

namespace dakit {

/// 1D shallow-water flux in normal form. The state triple is
/// (h, qn, qt) = (height, wall-normal momentum, tangential momentum); the
/// x sweep passes (h, hu, hv) and the y sweep (h, hv, hu).
using Cons3 = std::array<double, 3>;

/// F(h,qn,qt) = (qn, qn^2/h + g h^2/2, qn qt / h)
Cons3 physical_flux(const Cons3& u, double gravity);

/// Roe approximate Riemann flux between left and right cell states,
/// linearized in the w = (sqrt(h), u sqrt(h), v sqrt(h)) variables with
/// arithmetic averages, celerity cbar = sqrt(g (hL+hR)/2), and a Harten
/// entropy fix of width 0.05*(|ubar| + cbar).
Cons3 roe_flux(const Cons3& left, const Cons3& right, double gravity);

/// Exact directional derivative of roe_flux at (left, right), with the
/// entropy-fix and modulus branches frozen at the linearization point.
Cons3 roe_flux_tangent(const Cons3& left, const Cons3& right, const Cons3& dleft, const Cons3& dright,
                       double gravity);

/// Transpose of roe_flux_tangent: accumulates (d flux/d left)^T fbar into
/// lbar and (d flux/d right)^T fbar into rbar.
void roe_flux_adjoint(const Cons3& left, const Cons3& right, const Cons3& fbar, double gravity, Cons3& lbar,
                      Cons3& rbar);

} // namespace dakit
