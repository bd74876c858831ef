#include "nucc/min_energy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "nucc/errors.hpp"
#include "nucc/ode.hpp"

namespace nucc {

Eigen::VectorXd ControlSchedule::value(double time) const {
  if (t.empty()) throw PreconditionError("schedule: empty");
  if (time <= t.front()) return u.front();
  if (time >= t.back()) return u.back();
  auto it = std::upper_bound(t.begin(), t.end(), time);
  const size_t i = static_cast<size_t>(it - t.begin()) - 1;
  const double w = (time - t[i]) / (t[i + 1] - t[i]);
  return (1.0 - w) * u[i] + w * u[i + 1];
}

double ControlSchedule::energy_sq() const {
  const size_t m = t.size();
  if (m < 2) return 0.0;
  const double span = t.back() - t.front();
  // schedules built by min_energy_input are uniform with an odd point count;
  // composite Simpson on the sampled |u|^2 is then fourth order, while the
  // piecewise-linear segment rule keeps an O(h^2) bias wherever u has a kink
  bool simpson = m >= 3 && m % 2 == 1;
  const double h = span / static_cast<double>(m - 1);
  for (size_t i = 0; simpson && i + 1 < m; ++i)
    if (std::abs(t[i + 1] - t[i] - h) > 1e-12 * std::max(span, 1.0))
      simpson = false;
  if (simpson) {
    double acc = u.front().squaredNorm() + u.back().squaredNorm();
    for (size_t i = 1; i + 1 < m; ++i)
      acc += (i % 2 == 1 ? 4.0 : 2.0) * u[i].squaredNorm();
    return acc * h / 3.0;
  }
  // nonuniform fallback: the linear interpolant's |u|^2 integrates exactly
  double acc = 0.0;
  for (size_t i = 0; i + 1 < m; ++i) {
    const double dt = t[i + 1] - t[i];
    acc += dt *
           (u[i].squaredNorm() + u[i].dot(u[i + 1]) + u[i + 1].squaredNorm()) /
           3.0;
  }
  return acc;
}

void ControlSchedule::to_csv(std::ostream& os) const {
  const int p = t.empty() ? 0 : static_cast<int>(u[0].size());
  os << "t";
  for (int j = 1; j <= p; ++j) os << ",u" << j;
  os << "\n";
  os << std::setprecision(17);
  for (size_t i = 0; i < t.size(); ++i) {
    os << t[i];
    for (int j = 0; j < p; ++j) os << "," << u[i](j);
    os << "\n";
  }
}

MinEnergyResult min_energy_input(const Propagator& prop, double t0, double tf,
                                 const Eigen::VectorXd& x0, double tol,
                                 int grid_points) {
  if (grid_points < 2)
    throw PreconditionError("min_energy_input: need at least 2 grid points");
  const int n = prop.dim();
  const int p = prop.system().input_dim;
  if (x0.size() != n)
    throw PreconditionError("min_energy_input: x0 dimension mismatch");

  MinEnergyResult res;
  res.W = gramian_W(prop, t0, tf, tol);
  res.W.require_valid();
  res.x0 = x0;

  res.u.t.resize(grid_points);
  for (int i = 0; i < grid_points; ++i)
    res.u.t[i] = t0 + (tf - t0) * i / (grid_points - 1);
  res.u.t.back() = tf;

  if (x0.norm() == 0.0) {
    res.u.u.assign(grid_points, Eigen::VectorXd::Zero(p));
    res.x_end = Eigen::VectorXd::Zero(n);
    return res;
  }

  const double ratio =
      res.W.eig_max > 0 ? res.W.eig_min / res.W.eig_max : 0.0;
  if (!(ratio > 1e-12)) {
    std::ostringstream os;
    os << "not controllable on [" << t0 << ", " << tf
       << "]: gramian eig ratio " << ratio << " at or below 1e-12";
    throw SingularGramianError(os.str(), ratio);
  }
  const Eigen::VectorXd winv_x0 = res.W.matrix.ldlt().solve(x0);
  res.energy_sq_gramian = x0.dot(winv_x0);

  // Augmented state [Z(s) = Phi(t0, s) flattened; x; accumulated energy];
  // u(s) = -B^T(s) Z^T(s) W^{-1} x0 is evaluated exactly inside the RHS.
  const int nz = n * n;
  ode::Rhs rhs = [&, A = Eigen::MatrixXd(n, n), B = Eigen::MatrixXd(n, p),
                  u = Eigen::VectorXd(p)](double s, const Eigen::VectorXd& y,
                                          Eigen::VectorXd& dy) mutable {
    prop.system().A->eval(s, A);
    prop.system().B->eval(s, B);
    Eigen::Map<const Eigen::MatrixXd> Z(y.data(), n, n);
    Eigen::Map<Eigen::MatrixXd> dZ(dy.data(), n, n);
    u.noalias() = -(B.transpose() * (Z.transpose() * winv_x0));
    dZ.noalias() = -(Z * A);
    dy.segment(nz, n).noalias() = A * y.segment(nz, n) + B * u;
    dy(nz + n) = u.squaredNorm();
  };

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(nz + n + 1);
  Eigen::Map<Eigen::MatrixXd>(y0.data(), n, n).setIdentity();
  y0.segment(nz, n) = x0;

  ode::Options oo;
  oo.rel_tol = std::min(tol, 1e-9);
  oo.abs_tol = 1e-13;
  auto samples = ode::sample(rhs, t0, std::move(y0), res.u.t, oo);

  res.u.u.resize(grid_points);
  Eigen::MatrixXd B(n, p);
  for (int i = 0; i < grid_points; ++i) {
    Eigen::Map<const Eigen::MatrixXd> Z(samples[i].data(), n, n);
    prop.system().B->eval(res.u.t[i], B);
    res.u.u[i] = -(B.transpose() * (Z.transpose() * winv_x0));
  }
  const Eigen::VectorXd& last = samples.back();
  res.x_end = last.segment(nz, n);
  res.endpoint_norm = res.x_end.norm();
  res.energy_sq_ode = last(nz + n);
  return res;
}

EnergyReport energy_report(const ControlSchedule& u, const GramianResult& W,
                           const Eigen::VectorXd& x0) {
  if (u.t.empty() || u.t.size() != u.u.size())
    throw PreconditionError("energy_report: malformed schedule");
  const double span = W.b - W.a;
  if (std::abs(u.t.front() - W.a) > 1e-9 * span ||
      std::abs(u.t.back() - W.b) > 1e-9 * span)
    throw PreconditionError(
        "energy_report: schedule does not cover the gramian window");

  EnergyReport rep;
  rep.x0 = x0;
  rep.energy_sq = u.energy_sq();
  const double xn2 = x0.squaredNorm();
  const double inf = std::numeric_limits<double>::infinity();
  if (xn2 == 0.0) {
    rep.lower_bound = 0.0;
    rep.upper_bound = 0.0;
  } else {
    rep.lower_bound = W.eig_max > 0 ? xn2 / W.eig_max : inf;
    rep.upper_bound = W.eig_min > 0 ? xn2 / W.eig_min : inf;
  }
  return rep;
}

}  // namespace nucc
