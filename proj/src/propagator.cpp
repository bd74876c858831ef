#include "nucc/propagator.hpp"

#include <cmath>

#include "nucc/errors.hpp"
#include "nucc/ode.hpp"
#include "nucc/quadrature.hpp"

namespace nucc {

namespace {

// Flattened matrix ODE right-hand sides (column-major, Eigen's layout).
ode::Rhs matrix_rhs_left(const TimeMatrix& a, int n) {
  // X' = A(t) X
  return [&a, n, A = Eigen::MatrixXd(n, n)](double t, const Eigen::VectorXd& y,
                                            Eigen::VectorXd& dy) mutable {
    a.eval(t, A);
    Eigen::Map<const Eigen::MatrixXd> X(y.data(), n, n);
    Eigen::Map<Eigen::MatrixXd> D(dy.data(), n, n);
    D.noalias() = A * X;
  };
}

ode::Rhs matrix_rhs_right_neg(const TimeMatrix& a, int n) {
  // Z' = -Z A(t)
  return [&a, n, A = Eigen::MatrixXd(n, n)](double t, const Eigen::VectorXd& y,
                                            Eigen::VectorXd& dy) mutable {
    a.eval(t, A);
    Eigen::Map<const Eigen::MatrixXd> Z(y.data(), n, n);
    Eigen::Map<Eigen::MatrixXd> D(dy.data(), n, n);
    D.noalias() = -(Z * A);
  };
}

Eigen::VectorXd flatten_identity(int n) {
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  return Eigen::Map<Eigen::VectorXd>(I.data(), n * n);
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

Propagator::Propagator(SystemDef sys, PropagatorOptions opt)
    : sys_(std::move(sys)), opt_(opt) {
  sys_.validate();
  if (opt_.path == Path::Analytic && !has_analytic())
    throw PreconditionError(
        "propagator: analytic path requested but the system has no closed "
        "form");
}

Eigen::MatrixXd Propagator::transition(double t, double s) const {
  sys_.domain.require(t, "transition");
  sys_.domain.require(s, "transition");
  const int n = sys_.state_dim;
  if (t == s) return Eigen::MatrixXd::Identity(n, n);

  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = cache_.find({t, s});
    if (it != cache_.end()) return it->second;
  }

  Eigen::MatrixXd result;
  if (has_analytic() && opt_.path != Path::Numeric) {
    const double lg = sys_.analytic_log_phi(t, s);
    if (lg >= std::log(opt_.norm_cap))
      throw GrowthOverflowError("transition: closed form exceeds the norm cap",
                                t);
    // Scalar solutions from a positive start stay positive.
    result = Eigen::MatrixXd::Constant(1, 1, std::exp(lg));
  } else {
    result = numeric_transition(t, s);
  }

  std::lock_guard<std::mutex> lock(cache_mu_);
  if (cache_.size() >= 8192) cache_.clear();
  return cache_.emplace(std::make_pair(t, s), std::move(result))
      .first->second;
}

Eigen::MatrixXd Propagator::numeric_transition(double t, double s) const {
  const int n = sys_.state_dim;
  ode::Options o;
  o.rel_tol = opt_.rel_tol;
  o.abs_tol = opt_.abs_tol;
  o.norm_cap = opt_.norm_cap;
  auto res = ode::integrate(matrix_rhs_left(*sys_.A, n), s, t,
                            flatten_identity(n), o);
  return Eigen::Map<const Eigen::MatrixXd>(res.y.data(), n, n);
}

double Propagator::log_norm_transition(double t, double s) const {
  sys_.domain.require(t, "log_norm_transition");
  sys_.domain.require(s, "log_norm_transition");
  if (t == s) return 0.0;

  if (has_analytic() && opt_.path != Path::Numeric)
    return sys_.analytic_log_phi(t, s);

  const int n = sys_.state_dim;
  if (n == 1) {
    // ln|Phi(t,s)| = integral of a(tau) over [s, t].
    Eigen::MatrixXd buf(1, 1);
    auto a = [this, &buf](double tau) {
      sys_.A->eval(tau, buf);
      return buf(0, 0);
    };
    quad::Options qo;
    qo.rel_tol = opt_.rel_tol;
    qo.abs_tol = opt_.abs_tol;
    const double lo = std::min(s, t), hi = std::max(s, t);
    const double v = quad::integrate_scalar(a, lo, hi, qo);
    return t > s ? v : -v;
  }

  // Renormalized propagation: halt whenever the state leaves a comfortable
  // band, rescale to unit norm, keep the log of the product of scales.
  ode::Options o;
  o.rel_tol = opt_.rel_tol;
  o.abs_tol = opt_.abs_tol;
  o.norm_cap = 1e305;  // the watch below halts far before this
  auto rhs = matrix_rhs_left(*sys_.A, n);
  ode::StepWatch watch = [](double, const Eigen::VectorXd& y, bool& halt) {
    const double nm = y.norm();
    if (nm > 1e100 || nm < 1e-100) halt = true;
  };

  Eigen::VectorXd y = flatten_identity(n);
  double t_cur = s;
  double ln_scale = 0.0;
  while (true) {
    auto res = ode::integrate(rhs, t_cur, t, y, o, watch);
    if (!res.halted) {
      y = std::move(res.y);
      break;
    }
    const double nm = res.y.norm();
    ln_scale += std::log(nm);
    y = res.y / nm;
    t_cur = res.t;
  }
  Eigen::Map<const Eigen::MatrixXd> X(y.data(), n, n);
  return ln_scale + std::log(spectral_norm(X));
}

AnchoredFlow::AnchoredFlow(const Propagator& prop, double anchor, Mode mode)
    : prop_(prop), anchor_(anchor), mode_(mode) {
  prop_.system().domain.require(anchor, "anchored flow");
  const int n = prop_.dim();
  knots_.emplace(anchor, Eigen::MatrixXd::Identity(n, n));
}

const Eigen::MatrixXd& AnchoredFlow::at(double s) {
  prop_.system().domain.require(s, "anchored flow");
  auto hit = knots_.find(s);
  if (hit != knots_.end()) return hit->second;

  // Nearest stored knot: compare the neighbors around the insertion point.
  auto above = knots_.lower_bound(s);
  auto start = above;
  if (above == knots_.end()) {
    start = std::prev(above);
  } else if (above != knots_.begin()) {
    auto below = std::prev(above);
    if (s - below->first <= above->first - s) start = below;
  }

  const int n = prop_.dim();
  const auto& opt = prop_.options();
  ode::Options o;
  // Values get chained knot to knot, so integrate tighter than the caller's
  // target to leave the accumulated error below it.
  o.rel_tol = std::max(1e-13, 0.01 * opt.rel_tol);
  o.abs_tol = std::max(1e-16, 0.01 * opt.abs_tol);
  o.norm_cap = opt.norm_cap;

  const TimeMatrix& a = *prop_.system().A;
  auto rhs = mode_ == Mode::FromAnchor ? matrix_rhs_right_neg(a, n)
                                       : matrix_rhs_left(a, n);
  Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(
      start->second.data(), n * n);
  auto res = ode::integrate(rhs, start->first, s, std::move(y0), o);
  Eigen::MatrixXd Z = Eigen::Map<const Eigen::MatrixXd>(res.y.data(), n, n);

  // A nearly vanished knot would poison later chains that grow back up, so
  // hand it out without storing it.
  if (Z.norm() < 1e-120) {
    transient_ = std::move(Z);
    return transient_;
  }
  return knots_.emplace(s, std::move(Z)).first->second;
}

}  // namespace nucc
