#include "dakit/en4dvar.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

#include "dakit/swe.hpp"

namespace dakit {

Increment PerturbationMatrix::covariance_apply(const Increment& v) const {
  Increment out(v.nx(), v.ny());
  for (const Increment& col : cols) axpy(dot(col, v), col, out);
  return out;
}

PerturbationMatrix anomalies(const Ensemble& ens) {
  ens.validate();
  PerturbationMatrix p;
  p.mean = ens.mean();
  const double scale = 1.0 / std::sqrt(static_cast<double>(ens.size() - 1));
  p.cols.reserve(ens.size());
  for (const StateField& m : ens.members) {
    Increment c = m - p.mean;
    dakit::scale(c, scale);
    p.cols.push_back(std::move(c));
  }
  return p;
}

std::vector<Trajectory> propagate_ensemble(const Ensemble& ens, const GridSpec& grid, double t0, double tf,
                                           const std::vector<double>& record_times, double cfl, int threads) {
  ens.validate();
  const int n = ens.size();
  std::vector<Trajectory> trajs(n);
  const IntegrateOptions opt{cfl, /*store_checkpoints=*/false};
  auto work = [&](int i) { trajs[i] = integrate(ens.members[i], grid, t0, tf, record_times, opt); };
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(n);
    for (int i = 0; i < n; ++i) futs.push_back(std::async(std::launch::async, work, i));
    for (auto& f : futs) f.get();
  }
  return trajs;
}

SqrtB::SqrtB(std::vector<Increment> cols, const LocalizationBasis* loc) : cols_(std::move(cols)), loc_(loc) {
  if (cols_.empty()) throw std::invalid_argument("SqrtB: no anomaly columns");
  if (loc_ && loc_->modes.rows() != static_cast<Eigen::Index>(cols_.front().h.size()))
    throw std::invalid_argument("SqrtB: localization basis does not match the grid");
}

int SqrtB::dim() const {
  return loc_ ? static_cast<int>(cols_.size()) * loc_->rank : static_cast<int>(cols_.size());
}

Increment SqrtB::apply(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) throw std::invalid_argument("SqrtB::apply: control dimension mismatch");
  Increment out(cols_.front().nx(), cols_.front().ny());
  if (!loc_) {
    for (std::size_t k = 0; k < cols_.size(); ++k) axpy(z[static_cast<Eigen::Index>(k)], cols_[k], out);
    return out;
  }
  const int r = loc_->rank;
  const std::size_t ncell = out.h.size();
  for (std::size_t k = 0; k < cols_.size(); ++k) {
    const Eigen::VectorXd cz = loc_->modes * z.segment(static_cast<Eigen::Index>(k) * r, r);
    for (int c = 0; c < 3; ++c) {
      const ScalarField& col = cols_[k].comp(c);
      ScalarField& o = out.comp(c);
      for (std::size_t q = 0; q < ncell; ++q) o[q] += col[q] * cz[static_cast<Eigen::Index>(q)];
    }
  }
  return out;
}

Eigen::VectorXd SqrtB::apply_transpose(const Increment& w) const {
  Eigen::VectorXd out(dim());
  if (!loc_) {
    for (std::size_t k = 0; k < cols_.size(); ++k) out[static_cast<Eigen::Index>(k)] = dot(cols_[k], w);
    return out;
  }
  const int r = loc_->rank;
  const std::size_t ncell = w.h.size();
  Eigen::VectorXd s(static_cast<Eigen::Index>(ncell));
  for (std::size_t k = 0; k < cols_.size(); ++k) {
    s.setZero();
    for (int c = 0; c < 3; ++c) {
      const ScalarField& col = cols_[k].comp(c);
      const ScalarField& ww = w.comp(c);
      for (std::size_t q = 0; q < ncell; ++q) s[static_cast<Eigen::Index>(q)] += col[q] * ww[q];
    }
    out.segment(static_cast<Eigen::Index>(k) * r, r) = loc_->modes.transpose() * s;
  }
  return out;
}

SqrtB sqrtB_at(double t, const std::vector<Trajectory>& member_trajs, const LocalizationBasis* loc) {
  if (member_trajs.size() < 2) throw std::invalid_argument("sqrtB_at: at least two member trajectories");
  const int n = static_cast<int>(member_trajs.size());
  std::vector<const StateField*> states;
  states.reserve(n);
  for (const Trajectory& tr : member_trajs) states.push_back(&tr.state_at(t));

  StateField mean(states.front()->nx(), states.front()->ny());
  for (const StateField* s : states)
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < mean.comp(c).size(); ++k) mean.comp(c)[k] += s->comp(c)[k];
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < mean.comp(c).size(); ++k) mean.comp(c)[k] /= n;

  const double scale = 1.0 / std::sqrt(static_cast<double>(n - 1));
  std::vector<Increment> cols;
  cols.reserve(n);
  for (const StateField* s : states) {
    Increment c = *s - mean;
    dakit::scale(c, scale);
    cols.push_back(std::move(c));
  }
  return SqrtB(std::move(cols), loc);
}

EnProblem::EnProblem(const Trajectory& outer, const std::vector<Trajectory>& member_trajs,
                     const ObservationSet& obs, const LocalizationBasis* loc)
    : outer_(outer), obs_(obs), sqrtb_t0_(sqrtB_at(outer.t0(), member_trajs, loc)) {
  innov_ = innovation(outer, obs);
  sqrtb_.reserve(obs.times.size());
  for (double t : obs.times) sqrtb_.push_back(sqrtB_at(t, member_trajs, loc));
  dim_ = sqrtb_t0_.dim();
}

std::pair<double, Eigen::VectorXd> EnProblem::cost_grad(const Eigen::VectorXd& z) const {
  double j = 0.5 * z.squaredNorm();
  Eigen::VectorXd grad = z;
  for (std::size_t m = 0; m < obs_.times.size(); ++m) {
    const StateField& xt = outer_.state_at(obs_.times[m]);
    const Increment dx = sqrtb_[m].apply(z);
    std::vector<double> r = observe_tangent(xt, obs_.mask, dx);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= innov_[m][k];
    for (std::size_t k = 0; k < r.size(); ++k) j += 0.5 * r[k] * r[k] / obs_.variance[k];
    for (std::size_t k = 0; k < r.size(); ++k) r[k] /= obs_.variance[k];
    Increment w(outer_.grid);
    observe_adjoint(xt, obs_.mask, r, w);
    grad += sqrtb_[m].apply_transpose(w);
  }
  return {j, std::move(grad)};
}

Eigen::VectorXd EnProblem::hess_apply(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out = z;
  for (std::size_t m = 0; m < obs_.times.size(); ++m) {
    const StateField& xt = outer_.state_at(obs_.times[m]);
    const Increment dx = sqrtb_[m].apply(z);
    std::vector<double> r = observe_tangent(xt, obs_.mask, dx);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] /= obs_.variance[k];
    Increment w(outer_.grid);
    observe_adjoint(xt, obs_.mask, r, w);
    out += sqrtb_[m].apply_transpose(w);
  }
  return out;
}

Eigen::VectorXd EnProblem::rhs() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim_);
  for (std::size_t m = 0; m < obs_.times.size(); ++m) {
    std::vector<double> r(innov_[m].size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = innov_[m][k] / obs_.variance[k];
    Increment w(outer_.grid);
    observe_adjoint(outer_.state_at(obs_.times[m]), obs_.mask, r, w);
    b += sqrtb_[m].apply_transpose(w);
  }
  return b;
}

double EnProblem::innovation_cost() const {
  double j = 0.0;
  for (std::size_t m = 0; m < innov_.size(); ++m)
    for (std::size_t k = 0; k < innov_[m].size(); ++k)
      j += 0.5 * innov_[m][k] * innov_[m][k] / obs_.variance[k];
  return j;
}

Increment EnProblem::analysis_increment(const Eigen::VectorXd& z) const { return sqrtb_t0_.apply(z); }

} // namespace dakit
