#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace nucc::ode {

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  // sup-norm guard: an accepted state at or above this raises
  // GrowthOverflowError carrying the crossing time
  double norm_cap = 1e300;
  long max_steps = 20000000;
};

using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

// Invoked after every accepted step; set halt to stop at that step's endpoint.
using StepWatch = std::function<void(double t, const Eigen::VectorXd& y, bool& halt)>;

struct Result {
  double t = 0;  // where integration actually stopped
  Eigen::VectorXd y;
  long n_accepted = 0;
  long n_rejected = 0;
  bool halted = false;  // a StepWatch asked to stop early
};

// Dormand-Prince 5(4): adaptive, FSAL, works in either time direction.
Result integrate(const Rhs& f, double t0, double t1, Eigen::VectorXd y0,
                 const Options& opt = {}, const StepWatch& watch = {});

// Solution values at each time in ts. ts must move monotonically away from t0
// (increasing or decreasing); values come from the integrator's dense output,
// so accuracy matches the step tolerance.
std::vector<Eigen::VectorXd> sample(const Rhs& f, double t0, Eigen::VectorXd y0,
                                    const std::vector<double>& ts,
                                    const Options& opt = {});

}  // namespace nucc::ode
