#include "dakit/en4dvar.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dakit {

CorrelationKind correlation_kind_from_string(const std::string& s) {
  if (s == "gaussian") return CorrelationKind::gaussian;
  if (s == "gaspari-cohn" || s == "gc" || s == "compact-polynomial") return CorrelationKind::gaspari_cohn;
  throw std::invalid_argument("unknown correlation kind: " + s);
}

std::string to_string(CorrelationKind k) {
  return k == CorrelationKind::gaussian ? "gaussian" : "gaspari-cohn";
}

double correlation_value(double d, CorrelationKind kind, double cutoff) {
  if (d < 0.0) throw std::invalid_argument("correlation_value: negative distance");
  if (cutoff <= 0.0) throw std::invalid_argument("correlation_value: cutoff must be > 0");
  if (d >= 2.0 * cutoff) return 0.0;
  if (kind == CorrelationKind::gaussian) return std::exp(-d * d / (2.0 * cutoff * cutoff));
  // Gaspari-Cohn fifth-order piecewise rational, support radius 2*cutoff
  const double z = d / cutoff;
  if (z <= 1.0) {
    return -0.25 * z * z * z * z * z + 0.5 * z * z * z * z + 0.625 * z * z * z - 5.0 / 3.0 * z * z + 1.0;
  }
  return z * z * z * z * z / 12.0 - 0.5 * z * z * z * z + 0.625 * z * z * z + 5.0 / 3.0 * z * z - 5.0 * z + 4.0 -
         2.0 / (3.0 * z);
}

LocalizationBasis build_localization(const GridSpec& grid, CorrelationKind kind, double cutoff, double energy,
                                     int modes) {
  if (modes < 0 || modes > grid.cells()) throw std::invalid_argument("build_localization: bad mode count");
  if (modes == 0 && (energy <= 0.0 || energy > 1.0))
    throw std::invalid_argument("build_localization: energy fraction must be in (0, 1]");
  const int n = grid.cells();
  Eigen::MatrixXd c(n, n);
  for (int b = 0; b < n; ++b) {
    const int ib = b % grid.nx, jb = b / grid.nx;
    for (int a = 0; a <= b; ++a) {
      const int ia = a % grid.nx, ja = a / grid.nx;
      const double d = std::hypot((ia - ib) * grid.dx, (ja - jb) * grid.dy);
      const double v = correlation_value(d, kind, cutoff);
      c(a, b) = v;
      c(b, a) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw std::runtime_error("build_localization: eigensolver failed");

  // eigenvalues ascending from Eigen; walk from the top
  LocalizationBasis basis;
  basis.kind = kind;
  basis.cutoff = cutoff;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double lam = es.eigenvalues()(k);
    if (lam > 0.0)
      total += lam;
    else
      ++basis.clipped;
  }
  const int n_positive = n - basis.clipped;

  int r = 0;
  double kept = 0.0;
  if (modes > 0) {
    r = std::min(modes, n_positive);
    for (int k = 0; k < r; ++k) kept += es.eigenvalues()(n - 1 - k);
  } else {
    while (r < n_positive && kept < energy * total - 1e-15 * total) {
      kept += es.eigenvalues()(n - 1 - r);
      ++r;
    }
    r = std::max(r, 1);
  }
  basis.rank = r;
  basis.energy_kept = total > 0.0 ? kept / total : 0.0;
  basis.modes.resize(n, r);
  for (int k = 0; k < r; ++k)
    basis.modes.col(k) = es.eigenvectors().col(n - 1 - k) * std::sqrt(es.eigenvalues()(n - 1 - k));
  return basis;
}

} // namespace dakit
