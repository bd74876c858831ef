#pragma once

#include <Eigen/Dense>
#include <functional>

namespace nucc::quad {

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_depth = 42;
  // total panel evaluations before refinement stops; near-singular integrands
  // otherwise spend millions of panels failing to converge
  long max_panels = 20000;
};

struct Estimate {
  Eigen::MatrixXd value;
  double error = 0;      // accumulated per-panel error bound
  long n_panels = 0;
  bool converged = true; // false when depth or panel budget ran out first
};

using Integrand = std::function<void(double s, Eigen::MatrixXd& out)>;

// Adaptive Gauss-Kronrod 7-15 on [a, b] (a <= b) with deterministic
// depth-first bisection: panel order, and therefore floating-point results,
// do not depend on thread count or timing.
Estimate integrate(const Integrand& f, double a, double b, int rows, int cols,
                   const Options& opt = {});

double integrate_scalar(const std::function<double(double)>& f, double a,
                        double b, const Options& opt = {});

}  // namespace nucc::quad
