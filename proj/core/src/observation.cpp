#include "dakit/observation.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dakit/io.hpp"

namespace dakit {

ObsMask::ObsMask(int nx_, int ny_, bool h_on, bool u_on, bool v_on) : nx(nx_), ny(ny_) {
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  sel[0].assign(n, h_on ? 1 : 0);
  sel[1].assign(n, u_on ? 1 : 0);
  sel[2].assign(n, v_on ? 1 : 0);
}

int ObsMask::count() const {
  int c = 0;
  for (const auto& v : sel)
    for (auto b : v) c += b ? 1 : 0;
  return c;
}

bool ObsMask::component_on(int c) const {
  for (auto b : sel[c])
    if (b) return true;
  return false;
}

bool ObsMask::uniform_full() const {
  for (const auto& v : sel)
    for (auto b : v)
      if (!b) return false;
  return true;
}

void ObservationSet::validate() const {
  if (values.size() != times.size()) throw std::invalid_argument("ObservationSet: values/times mismatch");
  const std::size_t n = static_cast<std::size_t>(mask.count());
  for (const auto& v : values)
    if (v.size() != n) throw std::invalid_argument("ObservationSet: packed size mismatch");
  if (variance.size() != n) throw std::invalid_argument("ObservationSet: variance size mismatch");
  for (double v : variance)
    if (v <= 0.0) throw std::invalid_argument("ObservationSet: variances must be > 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1]) throw std::invalid_argument("ObservationSet: times must increase");
}

std::vector<double> observe(const StateField& s, const ObsMask& mask) {
  if (s.nx() != mask.nx || s.ny() != mask.ny) throw std::invalid_argument("observe: grid/mask mismatch");
  std::vector<double> out;
  out.reserve(mask.count());
  const std::size_t n = s.h.size();
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k) {
      if (!mask.sel[c][k]) continue;
      if (c == 0)
        out.push_back(s.h[k]);
      else if (c == 1)
        out.push_back(s.hu[k] / s.h[k]);
      else
        out.push_back(s.hv[k] / s.h[k]);
    }
  return out;
}

std::vector<double> observe_tangent(const StateField& s, const ObsMask& mask, const Increment& d) {
  std::vector<double> out;
  out.reserve(mask.count());
  const std::size_t n = s.h.size();
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k) {
      if (!mask.sel[c][k]) continue;
      if (c == 0) {
        out.push_back(d.h[k]);
      } else {
        const double h = s.h[k];
        const double q = c == 1 ? s.hu[k] : s.hv[k];
        const double dq = c == 1 ? d.hu[k] : d.hv[k];
        // d(q/h) = dq/h - q dh / h^2
        out.push_back(dq / h - q * d.h[k] / (h * h));
      }
    }
  return out;
}

void observe_adjoint(const StateField& s, const ObsMask& mask, const std::vector<double>& w, Increment& out) {
  const std::size_t n = s.h.size();
  std::size_t p = 0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k) {
      if (!mask.sel[c][k]) continue;
      const double wk = w[p++];
      if (c == 0) {
        out.h[k] += wk;
      } else {
        const double h = s.h[k];
        const double q = c == 1 ? s.hu[k] : s.hv[k];
        if (c == 1)
          out.hu[k] += wk / h;
        else
          out.hv[k] += wk / h;
        out.h[k] -= wk * q / (h * h);
      }
    }
  if (p != w.size()) throw std::invalid_argument("observe_adjoint: packed size mismatch");
}

std::vector<std::vector<double>> innovation(const Trajectory& traj, const ObservationSet& obs) {
  std::vector<std::vector<double>> d(obs.times.size());
  for (std::size_t m = 0; m < obs.times.size(); ++m) {
    const StateField& x = traj.state_at(obs.times[m]);
    const std::vector<double> hx = observe(x, obs.mask);
    d[m].resize(hx.size());
    for (std::size_t k = 0; k < hx.size(); ++k) d[m][k] = obs.values[m][k] - hx[k];
  }
  return d;
}

void write_observations(const std::string& path, const ObservationSet& obs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "dakit-obs 1\n";
  out << "grid " << obs.mask.nx << ' ' << obs.mask.ny << "\n";
  out << "ntimes " << obs.times.size() << "\n";
  for (int c = 0; c < 3; ++c) {
    out << "mask " << c;
    for (auto b : obs.mask.sel[c]) out << (b ? " 1" : " 0");
    out << "\n";
  }
  out << "variance";
  for (double v : obs.variance) out << ' ' << format_full(v);
  out << "\n";
  for (std::size_t m = 0; m < obs.times.size(); ++m) {
    out << "time " << format_full(obs.times[m]) << "\n";
    out << "values";
    for (double v : obs.values[m]) out << ' ' << format_full(v);
    out << "\n";
  }
}

ObservationSet read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tok;
  int version = 0;
  in >> tok >> version;
  if (tok != "dakit-obs" || version != 1) throw std::runtime_error(path + ": not a dakit observation file");
  ObservationSet obs;
  int nx = 0, ny = 0;
  std::size_t ntimes = 0;
  in >> tok >> nx >> ny;
  in >> tok >> ntimes;
  obs.mask.nx = nx;
  obs.mask.ny = ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  for (int c = 0; c < 3; ++c) {
    int cc = 0;
    in >> tok >> cc;
    obs.mask.sel[cc].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      int b = 0;
      in >> b;
      obs.mask.sel[cc][k] = static_cast<std::uint8_t>(b);
    }
  }
  in >> tok;
  const std::size_t npacked = static_cast<std::size_t>(obs.mask.count());
  obs.variance.resize(npacked);
  for (double& v : obs.variance) in >> v;
  obs.times.resize(ntimes);
  obs.values.assign(ntimes, std::vector<double>(npacked));
  for (std::size_t m = 0; m < ntimes; ++m) {
    in >> tok >> obs.times[m];
    in >> tok;
    for (double& v : obs.values[m]) in >> v;
  }
  if (!in) throw std::runtime_error(path + ": truncated observation file");
  obs.validate();
  return obs;
}

} // namespace dakit
