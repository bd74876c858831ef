#include "nucc/gramian.hpp"

#include <cmath>
#include <sstream>

#include "nucc/errors.hpp"
#include "nucc/quadrature.hpp"

namespace nucc {

namespace {

const char* kind_name(GramianKind k) {
  switch (k) {
    case GramianKind::W: return "W";
    case GramianKind::K: return "K";
    case GramianKind::ShiftedW: return "shifted W";
    case GramianKind::Y: return "Y";
  }
  return "?";
}

quad::Options quad_options(double tol) {
  quad::Options o;
  o.rel_tol = tol;
  o.abs_tol = 1e-305;  // effectively relative-only; zero integrands still pass
  return o;
}

GramianResult finish(GramianKind kind, double a, double b,
                     quad::Estimate est, double tol) {
  if (!est.converged) {
    std::ostringstream os;
    os << "gramian " << kind_name(kind) << "(" << a << ", " << b
       << "): quadrature budget exhausted, achieved error " << est.error
       << " against relative target " << tol;
    throw AccuracyError(os.str(), est.error);
  }
  GramianResult r;
  r.kind = kind;
  r.a = a;
  r.b = b;
  const double scale = est.value.norm();
  r.asymmetry =
      scale > 0 ? (est.value - est.value.transpose()).norm() / scale : 0.0;
  r.matrix = 0.5 * (est.value + est.value.transpose());
  r.quadrature_error_estimate = est.error;
  r.n_panels = est.n_panels;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.matrix);
  r.eig_min = es.eigenvalues().minCoeff();
  r.eig_max = es.eigenvalues().maxCoeff();
  return r;
}

void require_window(const Propagator& prop, double a, double b,
                    const char* who) {
  if (!(a < b)) throw PreconditionError(std::string(who) + ": needs a < b");
  prop.system().domain.require(a, who);
  prop.system().domain.require(b, who);
}

}  // namespace

void GramianResult::require_valid() const {
  if (asymmetry > 1e-10) {
    std::ostringstream os;
    os << "gramian " << kind_name(kind) << ": asymmetry " << asymmetry
       << " above 1e-10";
    throw Error(os.str());
  }
  if (eig_min > eig_max) throw Error("gramian: eigenvalue order violated");
  if (eig_min < -1e-10 * std::max(eig_max, 0.0)) {
    std::ostringstream os;
    os << "gramian " << kind_name(kind) << ": eig_min " << eig_min
       << " breaks positive semidefiniteness (eig_max " << eig_max << ")";
    throw Error(os.str());
  }
}

GramianResult gramian_W(const Propagator& prop, double a, double b,
                        double tol) {
  require_window(prop, a, b, "gramian_W");
  const int n = prop.dim();
  AnchoredFlow flow(prop, a, AnchoredFlow::Mode::FromAnchor);
  Eigen::MatrixXd B(n, prop.system().input_dim), ZB;
  quad::Integrand f = [&](double s, Eigen::MatrixXd& out) {
    prop.system().B->eval(s, B);
    ZB.noalias() = flow.at(s) * B;
    out.noalias() = ZB * ZB.transpose();
  };
  return finish(GramianKind::W, a, b, quad::integrate(f, a, b, n, n, quad_options(tol)), tol);
}

GramianResult gramian_K(const Propagator& prop, double a, double b,
                        double tol) {
  require_window(prop, a, b, "gramian_K");
  const int n = prop.dim();
  AnchoredFlow flow(prop, b, AnchoredFlow::Mode::FromAnchor);
  Eigen::MatrixXd B(n, prop.system().input_dim), ZB;
  quad::Integrand f = [&](double s, Eigen::MatrixXd& out) {
    prop.system().B->eval(s, B);
    ZB.noalias() = flow.at(s) * B;
    out.noalias() = ZB * ZB.transpose();
  };
  return finish(GramianKind::K, a, b, quad::integrate(f, a, b, n, n, quad_options(tol)), tol);
}

double check_gramian_identity(const Propagator& prop, double a, double b,
                              double tol) {
  auto W = gramian_W(prop, a, b, tol);
  auto K = gramian_K(prop, a, b, tol);
  Eigen::MatrixXd P = prop.transition(b, a);
  Eigen::MatrixXd composed = P * W.matrix * P.transpose();
  const double scale = std::max(K.matrix.norm(), composed.norm());
  if (scale == 0.0) return 0.0;
  return (K.matrix - composed).norm() / scale;
}

GramianResult shifted_gramian(const Propagator& prop, double ell, double t,
                              double sigma, double tol) {
  if (!(ell > 0.0))
    throw PreconditionError("shifted_gramian: needs ell > 0");
  if (!(sigma > 0.0))
    throw PreconditionError("shifted_gramian: needs sigma > 0");
  const double b = t + sigma;
  require_window(prop, t, b, "shifted_gramian");
  const int n = prop.dim();
  AnchoredFlow flow(prop, t, AnchoredFlow::Mode::FromAnchor);
  Eigen::MatrixXd B(n, prop.system().input_dim), ZB;
  quad::Integrand f = [&](double s, Eigen::MatrixXd& out) {
    prop.system().B->eval(s, B);
    ZB.noalias() = flow.at(s) * B;
    out.noalias() = std::exp(2.0 * ell * (t - s)) * (ZB * ZB.transpose());
  };
  return finish(GramianKind::ShiftedW, t, b,
                quad::integrate(f, t, b, n, n, quad_options(tol)), tol);
}

GramianResult y_integral(const Propagator& prop, double ell, double t,
                         double sigma, double tol) {
  if (ell < 0.0) throw PreconditionError("y_integral: needs ell >= 0");
  if (!(sigma > 0.0)) throw PreconditionError("y_integral: needs sigma > 0");
  const double b = t + sigma;
  require_window(prop, t, b, "y_integral");
  const int n = prop.dim();
  AnchoredFlow flow(prop, t, AnchoredFlow::Mode::ToAnchor);
  quad::Integrand f = [&](double s, Eigen::MatrixXd& out) {
    const Eigen::MatrixXd& Z = flow.at(s);
    out.noalias() =
        std::exp(2.0 * ell * (s - t)) * (Z.transpose() * Z);
  };
  return finish(GramianKind::Y, t, b,
                quad::integrate(f, t, b, n, n, quad_options(tol)), tol);
}

}  // namespace nucc
