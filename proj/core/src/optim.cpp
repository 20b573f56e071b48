#include "dakit/optim.hpp"

#include <cmath>
#include <deque>

namespace dakit {

CgResult conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_a,
                            const Eigen::VectorXd& b, const Eigen::VectorXd& x0, int max_iter, double tol) {
  CgResult res;
  res.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  Eigen::VectorXd r = b - apply_a(res.x);
  double rnorm = r.norm();
  if (rnorm / bnorm <= tol) {
    res.converged = true;
    res.residual_ratio = rnorm / bnorm;
    return res;
  }
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd ap = apply_a(p);
    const double pap = p.dot(ap);
    if (pap <= 0.0) break; // not SPD (or numerically exhausted)
    const double alpha = rr / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    res.iterations = it + 1;
    rnorm = std::sqrt(rr_new);
    if (rnorm / bnorm <= tol) {
      res.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  res.residual_ratio = rnorm / bnorm;
  return res;
}

namespace {

struct LineSearchResult {
  double a = 0.0, f = 0.0;
  bool ok = false;
};

/// Strong-Wolfe line search (bracket then zoom). Evaluates fg at x + a*dir,
/// leaving the accepted point's gradient in gt.
LineSearchResult wolfe_search(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double f0, double dg0,
                              Eigen::VectorXd& gt, const LbfgsOptions& opt) {
  LineSearchResult out;
  const double c1 = opt.wolfe_c1, c2 = opt.wolfe_c2;
  double a_prev = 0.0, f_prev = f0, g_prev = dg0;
  double a = 1.0;
  double lo_a = -1, lo_f = 0, lo_g = 0, hi_a = -1;
  Eigen::VectorXd xt(x.size());

  for (int ls = 0; ls < opt.max_line_search; ++ls) {
    xt = x + a * dir;
    const double ft = fg(xt, gt);
    const double gd = gt.dot(dir);
    if (ft > f0 + c1 * a * dg0 || (ls > 0 && ft >= f_prev)) {
      lo_a = a_prev;
      lo_f = f_prev;
      lo_g = g_prev;
      hi_a = a;
      break;
    }
    if (std::fabs(gd) <= -c2 * dg0) {
      out = {a, ft, true};
      return out;
    }
    if (gd >= 0.0) {
      lo_a = a;
      lo_f = ft;
      lo_g = gd;
      hi_a = a_prev;
      break;
    }
    a_prev = a;
    f_prev = ft;
    g_prev = gd;
    a *= 2.0;
  }
  if (lo_a < 0.0) return out; // never bracketed

  for (int z = 0; z < opt.max_line_search; ++z) {
    double at = 0.5 * (lo_a + hi_a);
    xt = x + at * dir;
    const double ft = fg(xt, gt);
    const double gd = gt.dot(dir);
    if (ft > f0 + c1 * at * dg0 || ft >= lo_f) {
      hi_a = at;
    } else {
      if (std::fabs(gd) <= -c2 * dg0) {
        out = {at, ft, true};
        return out;
      }
      if (gd * (hi_a - lo_a) >= 0.0) hi_a = lo_a;
      lo_a = at;
      lo_f = ft;
      lo_g = gd;
    }
    if (std::fabs(hi_a - lo_a) <= 1e-14 * std::max(1.0, std::fabs(lo_a))) break;
  }
  (void)lo_g;
  if (lo_a > 0.0 && lo_f < f0) {
    // accept sufficient decrease even though curvature was not certified
    xt = x + lo_a * dir;
    const double ft = fg(xt, gt);
    out = {lo_a, ft, true};
  }
  return out;
}

} // namespace

LbfgsResult lbfgs_minimize(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
                           const Eigen::VectorXd& x0, const LbfgsOptions& opt) {
  LbfgsResult res;
  res.x = x0;
  res.grad.resize(x0.size());
  res.f = fg(res.x, res.grad);
  const double gref = std::max(1.0, res.grad.norm());

  std::deque<Eigen::VectorXd> svec, yvec;
  std::deque<double> rho;
  Eigen::VectorXd gt(x0.size());

  for (int it = 0; it < opt.max_iter; ++it) {
    if (res.grad.norm() / gref <= opt.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }

    Eigen::VectorXd q = res.grad;
    std::vector<double> alpha(svec.size());
    for (int i = static_cast<int>(svec.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * svec[i].dot(q);
      q -= alpha[i] * yvec[i];
    }
    if (!svec.empty())
      q *= svec.back().dot(yvec.back()) / yvec.back().squaredNorm();
    else
      q /= std::max(1.0, q.norm()); // unit-length first step
    for (std::size_t i = 0; i < svec.size(); ++i) {
      const double beta = rho[i] * yvec[i].dot(q);
      q += (alpha[i] - beta) * svec[i];
    }
    Eigen::VectorXd dir = -q;
    double dg = dir.dot(res.grad);
    if (dg >= 0.0) {
      dir = -res.grad;
      dg = -res.grad.squaredNorm();
    }

    const Eigen::VectorXd x_old = res.x;
    const Eigen::VectorXd g_old = res.grad;
    const LineSearchResult ls = wolfe_search(fg, res.x, dir, res.f, dg, gt, opt);
    if (!ls.ok) {
      // no representable progress along the search direction
      res.converged = res.grad.norm() / gref <= opt.grad_tol;
      res.message = "line search failed";
      return res;
    }
    res.x = x_old + ls.a * dir;
    res.f = ls.f;
    res.grad = gt;
    res.iterations = it + 1;

    const Eigen::VectorXd s = res.x - x_old;
    const Eigen::VectorXd y = res.grad - g_old;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      svec.push_back(s);
      yvec.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(svec.size()) > opt.memory) {
        svec.pop_front();
        yvec.pop_front();
        rho.pop_front();
      }
    }
  }
  res.message = "iteration limit reached";
  return res;
}

} // namespace dakit
