#include "nucc/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nucc/errors.hpp"

namespace nucc::ode {

namespace {

// Dormand-Prince 5(4) tableau, error weights, and the order-4 continuous
// extension coefficients (Hairer, Norsett & Wanner, DOPRI5).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

struct Stepper {
  const Rhs& f;
  const Options& opt;
  int n;
  double t, h, dir;
  Eigen::VectorXd y;
  Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, ynew, ytmp, err;
  // dense-output coefficients for the last accepted step
  Eigen::VectorXd r1, r2, r3, r4, r5;
  double t_old = 0, h_old = 0;
  long n_accepted = 0, n_rejected = 0;

  Stepper(const Rhs& f_, const Options& o, double t0, Eigen::VectorXd y0, double direction)
      : f(f_), opt(o), n(static_cast<int>(y0.size())), t(t0), h(0), dir(direction),
        y(std::move(y0)) {
    k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n); k5.resize(n);
    k6.resize(n); k7.resize(n); ynew.resize(n); ytmp.resize(n); err.resize(n);
    r1.resize(n); r2.resize(n); r3.resize(n); r4.resize(n); r5.resize(n);
    f(t, y, k1);
    if (!k1.allFinite())
      throw Error("ode: right-hand side not finite at the initial point t=" + std::to_string(t));
  }

  double error_norm(const Eigen::VectorXd& e, const Eigen::VectorXd& y0v,
                    const Eigen::VectorXd& y1v) const {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      const double sk = opt.abs_tol + opt.rel_tol * std::max(std::abs(y0v[i]), std::abs(y1v[i]));
      const double q = e[i] / sk;
      acc += q * q;
    }
    return std::sqrt(acc / n);
  }

  // Hairer's starting-step heuristic.
  void choose_initial_h(double span) {
    double d0 = 0, d1n = 0;
    for (int i = 0; i < n; ++i) {
      const double sk = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sk) * (y[i] / sk);
      d1n += (k1[i] / sk) * (k1[i] / sk);
    }
    d0 = std::sqrt(d0 / n);
    d1n = std::sqrt(d1n / n);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    ytmp = y + dir * h0 * k1;
    f(t + dir * h0, ytmp, k2);
    double d2 = 0;
    for (int i = 0; i < n; ++i) {
      const double sk = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
      const double q = (k2[i] - k1[i]) / sk;
      d2 += q * q;
    }
    d2 = std::sqrt(d2 / n) / h0;
    double h1;
    if (std::max(d1n, d2) <= 1e-15)
      h1 = std::max(1e-6, h0 * 1e-3);
    else
      h1 = std::pow(0.01 / std::max(d1n, d2), 0.2);
    h = dir * std::min({100 * h0, h1, span});
  }

  // One attempted step of size h; returns scaled error norm, fills ynew/k7.
  double attempt() {
    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);
    if (!ynew.allFinite() || !k7.allFinite())
      return std::numeric_limits<double>::infinity();
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return error_norm(err, y, ynew);
  }

  void prepare_dense() {
    r1 = y;
    r2 = ynew - y;
    r3 = h * k1 - r2;
    r4 = r2 - h * k7 - r3;
    r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  }

  Eigen::VectorXd dense_at(double tq) const {
    const double th = (tq - t_old) / h_old;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }

  void accept() {
    t_old = t;
    h_old = h;
    prepare_dense();
    t += h;
    y.swap(ynew);
    k1.swap(k7);  // FSAL
    ++n_accepted;
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() >= opt.norm_cap)
      throw GrowthOverflowError(
          "ode: state norm reached the overflow cap near t=" + std::to_string(t), t);
  }

  // Advances one accepted step toward t_end; returns false when t_end reached.
  bool advance(double t_end) {
    if (dir * (t_end - t) <= 0) return false;
    if (std::abs(h) > std::abs(t_end - t)) h = t_end - t;
    for (;;) {
      if (n_accepted + n_rejected >= opt.max_steps)
        throw Error("ode: exceeded max_steps near t=" + std::to_string(t));
      const double en = attempt();
      if (en <= 1.0) {
        accept();
        double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
        h *= std::clamp(fac, 0.2, 10.0);
        return true;
      }
      ++n_rejected;
      const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h *= fac;
      if (std::abs(h) < 16 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
        // step collapse: distinguish finite-time blow-up from a pathological rhs
        if (y.cwiseAbs().maxCoeff() > 1e10)
          throw GrowthOverflowError(
              "ode: step size collapsed while the state grew without bound near t=" +
                  std::to_string(t), t);
        throw Error("ode: step size underflow at t=" + std::to_string(t));
      }
    }
  }
};

}  // namespace

Result integrate(const Rhs& f, double t0, double t1, Eigen::VectorXd y0,
                 const Options& opt, const StepWatch& watch) {
  Result res;
  if (t0 == t1) {
    res.t = t0;
    res.y = std::move(y0);
    return res;
  }
  const double dir = t1 > t0 ? 1.0 : -1.0;
  Stepper st(f, opt, t0, std::move(y0), dir);
  st.choose_initial_h(std::abs(t1 - t0));
  while (st.advance(t1)) {
    if (watch) {
      bool halt = false;
      watch(st.t, st.y, halt);
      if (halt) {
        res.halted = true;
        break;
      }
    }
  }
  res.t = st.t;
  res.y = std::move(st.y);
  res.n_accepted = st.n_accepted;
  res.n_rejected = st.n_rejected;
  return res;
}

std::vector<Eigen::VectorXd> sample(const Rhs& f, double t0, Eigen::VectorXd y0,
                                    const std::vector<double>& ts, const Options& opt) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(ts.size());
  if (ts.empty()) return out;
  const double t_end = ts.back();
  if (t_end == t0) {
    for (size_t i = 0; i < ts.size(); ++i) {
      if (ts[i] != t0) throw Error("ode::sample: targets must move monotonically from t0");
      out.push_back(y0);
    }
    return out;
  }
  const double dir = t_end > t0 ? 1.0 : -1.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (dir * (ts[i] - t0) < 0 || (i + 1 < ts.size() && dir * (ts[i + 1] - ts[i]) < 0))
      throw Error("ode::sample: targets must move monotonically from t0");
  }
  Stepper st(f, opt, t0, std::move(y0), dir);
  st.choose_initial_h(std::abs(t_end - t0));
  size_t next = 0;
  while (next < ts.size() && ts[next] == t0) {
    out.push_back(st.y);
    ++next;
  }
  while (next < ts.size()) {
    if (!st.advance(t_end)) break;
    while (next < ts.size() && dir * (ts[next] - st.t) <= 0) {
      out.push_back(st.dense_at(ts[next]));
      ++next;
    }
  }
  // t_end hit exactly: flush any targets equal to the endpoint
  while (next < ts.size() && ts[next] == st.t) {
    out.push_back(st.y);
    ++next;
  }
  if (next < ts.size()) throw Error("ode::sample: integration stopped before the last target");
  return out;
}

}  // namespace nucc::ode
