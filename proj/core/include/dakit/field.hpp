#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "dakit/grid.hpp"

namespace dakit {

/// Flat 2D array of doubles addressed as (i, j) with i the x index.
/// Storage is row-major in j: index = j*nx + i, matching the snapshot format.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(int nx, int ny, double fill = 0.0) : nx_(nx), ny_(ny), v_(static_cast<std::size_t>(nx) * ny, fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return v_.size(); }

  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(j) * nx_ + i]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(j) * nx_ + i]; }
  double& operator[](std::size_t k) { return v_[k]; }
  double operator[](std::size_t k) const { return v_[k]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

private:
  int nx_ = 0, ny_ = 0;
  std::vector<double> v_;
};

/// Conserved shallow-water variables on a grid: height and momenta.
struct StateField {
  ScalarField h;  ///< water height [m]
  ScalarField hu; ///< x momentum [m^2/s]
  ScalarField hv; ///< y momentum [m^2/s]

  StateField() = default;
  StateField(int nx, int ny) : h(nx, ny), hu(nx, ny), hv(nx, ny) {}
  explicit StateField(const GridSpec& g) : StateField(g.nx, g.ny) {}

  int nx() const { return h.nx(); }
  int ny() const { return h.ny(); }

  ScalarField& comp(int c) { return c == 0 ? h : (c == 1 ? hu : hv); }
  const ScalarField& comp(int c) const { return c == 0 ? h : (c == 1 ? hu : hv); }
};

/// Perturbation of a StateField. Used both for tangent-linear states and for
/// adjoint (costate) fields; plain linear-space semantics.
struct Increment {
  ScalarField h, hu, hv;

  Increment() = default;
  Increment(int nx, int ny) : h(nx, ny), hu(nx, ny), hv(nx, ny) {}
  explicit Increment(const GridSpec& g) : Increment(g.nx, g.ny) {}

  int nx() const { return h.nx(); }
  int ny() const { return h.ny(); }

  ScalarField& comp(int c) { return c == 0 ? h : (c == 1 ? hu : hv); }
  const ScalarField& comp(int c) const { return c == 0 ? h : (c == 1 ? hu : hv); }
};

using TangentState = Increment;
using AdjointState = Increment;

// elementwise helpers ---------------------------------------------------

void axpy(double a, const Increment& x, Increment& y); // y += a*x
void scale(Increment& x, double a);
double dot(const Increment& a, const Increment& b);
double norm2(const Increment& a);
double max_abs(const Increment& a);

Increment operator-(const StateField& a, const StateField& b);
StateField operator+(const StateField& a, const Increment& d);
void add_in_place(StateField& a, const Increment& d);

/// Flatten to a vector ordered [h block, hu block, hv block], row-major blocks.
Eigen::VectorXd flatten(const Increment& d);
Eigen::VectorXd flatten(const StateField& s);
Increment unflatten(const Eigen::VectorXd& v, int nx, int ny);
StateField unflatten_state(const Eigen::VectorXd& v, int nx, int ny);

double total_mass(const StateField& s, const GridSpec& g); // sum h*dx*dy

} // namespace dakit
