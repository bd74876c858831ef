#pragma once

#include <map>
#include <mutex>
#include <utility>

#include "nucc/system.hpp"

namespace nucc {

// Which route transition() takes when a catalog closed form exists.
enum class Path { Auto, Analytic, Numeric };

struct PropagatorOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  // Raw transition values at or above this norm raise GrowthOverflowError.
  double norm_cap = 1e300;
  Path path = Path::Auto;
};

// Evaluator of the transition matrix Phi(t, s) of x' = A(t)x.
class Propagator {
 public:
  explicit Propagator(SystemDef sys, PropagatorOptions opt = {});

  const SystemDef& system() const { return sys_; }
  const PropagatorOptions& options() const { return opt_; }
  int dim() const { return sys_.state_dim; }
  bool has_analytic() const {
    return static_cast<bool>(sys_.analytic_log_phi) && sys_.state_dim == 1;
  }

  // Phi(t, s), both times in domain, either order. Values crossing the norm
  // cap raise GrowthOverflowError; work in log_norm_transition instead for
  // strongly expanding systems.
  Eigen::MatrixXd transition(double t, double s) const;

  // ln of the spectral norm of Phi(t, s), computed without forming
  // unrepresentable values. Scalar systems integrate a(t) directly; matrix
  // systems propagate with renormalization, accumulating the log of the
  // scale factors.
  double log_norm_transition(double t, double s) const;

 private:
  Eigen::MatrixXd numeric_transition(double t, double s) const;

  SystemDef sys_;
  PropagatorOptions opt_;
  // Exact-key memo of computed transitions; concurrent reads and writes are
  // serialized, entries are immutable once inserted.
  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<double, double>, Eigen::MatrixXd> cache_;
};

// Serves transition values with one argument pinned to an anchor time,
// chaining short integrations between previously visited knots instead of
// restarting from the anchor for every query. Query order is whatever the
// caller's refinement produces; results depend only on that order, which
// keeps adaptive quadrature deterministic. Not thread-safe: create one per
// computation.
class AnchoredFlow {
 public:
  enum class Mode {
    FromAnchor,  // Z(s) = Phi(anchor, s), solves Z' = -Z A(s)
    ToAnchor,    // Z(s) = Phi(s, anchor), solves Z' =  A(s) Z
  };

  AnchoredFlow(const Propagator& prop, double anchor, Mode mode);

  // Raw value at s; throws GrowthOverflowError past the propagator norm cap.
  const Eigen::MatrixXd& at(double s);

 private:
  const Propagator& prop_;
  double anchor_;
  Mode mode_;
  std::map<double, Eigen::MatrixXd> knots_;
  Eigen::MatrixXd transient_;  // holds values too small to be safe knots
};

}  // namespace nucc
