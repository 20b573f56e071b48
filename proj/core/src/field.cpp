#include "dakit/field.hpp"

#include <cmath>
#include <stdexcept>

namespace dakit {

namespace {
void check_same(int anx, int any, int bnx, int bny) {
  if (anx != bnx || any != bny) throw std::invalid_argument("field shape mismatch");
}
} // namespace

void axpy(double a, const Increment& x, Increment& y) {
  check_same(x.nx(), x.ny(), y.nx(), y.ny());
  for (int c = 0; c < 3; ++c) {
    const ScalarField& xs = x.comp(c);
    ScalarField& ys = y.comp(c);
    for (std::size_t k = 0; k < xs.size(); ++k) ys[k] += a * xs[k];
  }
}

void scale(Increment& x, double a) {
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < x.comp(c).size(); ++k) x.comp(c)[k] *= a;
}

double dot(const Increment& a, const Increment& b) {
  check_same(a.nx(), a.ny(), b.nx(), b.ny());
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    const ScalarField& as = a.comp(c);
    const ScalarField& bs = b.comp(c);
    for (std::size_t k = 0; k < as.size(); ++k) s += as[k] * bs[k];
  }
  return s;
}

double norm2(const Increment& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Increment& a) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < a.comp(c).size(); ++k) m = std::max(m, std::fabs(a.comp(c)[k]));
  return m;
}

Increment operator-(const StateField& a, const StateField& b) {
  check_same(a.nx(), a.ny(), b.nx(), b.ny());
  Increment d(a.nx(), a.ny());
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < d.comp(c).size(); ++k) d.comp(c)[k] = a.comp(c)[k] - b.comp(c)[k];
  return d;
}

StateField operator+(const StateField& a, const Increment& d) {
  StateField out = a;
  add_in_place(out, d);
  return out;
}

void add_in_place(StateField& a, const Increment& d) {
  check_same(a.nx(), a.ny(), d.nx(), d.ny());
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < d.comp(c).size(); ++k) a.comp(c)[k] += d.comp(c)[k];
}

namespace {
template <class F>
Eigen::VectorXd flatten_any(const F& f) {
  const std::size_t n = f.h.size();
  Eigen::VectorXd v(3 * n);
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k) v[c * n + k] = f.comp(c)[k];
  return v;
}
} // namespace

Eigen::VectorXd flatten(const Increment& d) { return flatten_any(d); }
Eigen::VectorXd flatten(const StateField& s) { return flatten_any(s); }

Increment unflatten(const Eigen::VectorXd& v, int nx, int ny) {
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (static_cast<std::size_t>(v.size()) != 3 * n) throw std::invalid_argument("unflatten: wrong length");
  Increment d(nx, ny);
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k) d.comp(c)[k] = v[c * n + k];
  return d;
}

StateField unflatten_state(const Eigen::VectorXd& v, int nx, int ny) {
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (static_cast<std::size_t>(v.size()) != 3 * n) throw std::invalid_argument("unflatten_state: wrong length");
  StateField s(nx, ny);
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k) s.comp(c)[k] = v[c * n + k];
  return s;
}

double total_mass(const StateField& s, const GridSpec& g) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.h.size(); ++k) m += s.h[k];
  return m * g.dx * g.dy;
}

} // namespace dakit
