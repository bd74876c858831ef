#pragma once

#include <Eigen/Dense>

#include "nucc/propagator.hpp"

namespace nucc {

enum class GramianKind { W, K, ShiftedW, Y };

struct GramianResult {
  GramianKind kind;
  double a = 0, b = 0;  // integration window
  Eigen::MatrixXd matrix;  // symmetrized
  double eig_min = 0, eig_max = 0;
  double quadrature_error_estimate = 0;  // absolute, accumulated over panels
  double asymmetry = 0;  // relative asymmetry before symmetrization
  long n_panels = 0;

  // Enforces the symmetry and positive-semidefiniteness contracts; throws
  // Error when violated.
  void require_valid() const;
};

// W(a,b) = integral over [a,b] of Phi(a,s) B(s) B^T(s) Phi^T(a,s) ds.
// tol is a relative target for the quadrature error; exhausting the
// subdivision budget raises AccuracyError with the achieved estimate.
GramianResult gramian_W(const Propagator& prop, double a, double b,
                        double tol = 1e-9);

// K(a,b): same kernel anchored at b, Phi(b,s) B B^T Phi^T(b,s).
GramianResult gramian_K(const Propagator& prop, double a, double b,
                        double tol = 1e-9);

// Relative residual of K(a,b) - Phi(b,a) W(a,b) Phi^T(b,a). Contract:
// at most 10 * tol.
double check_gramian_identity(const Propagator& prop, double a, double b,
                              double tol = 1e-9);

// W_ell(t, t+sigma): the W kernel damped by e^{2 ell (t - s)}, ell > 0.
GramianResult shifted_gramian(const Propagator& prop, double ell, double t,
                              double sigma, double tol = 1e-9);

// Y_ell(t, t+sigma) = integral of e^{2 ell (s-t)} Phi^T(s,t) Phi(s,t) ds,
// ell >= 0.
GramianResult y_integral(const Propagator& prop, double ell, double t,
                         double sigma, double tol = 1e-9);

}  // namespace nucc
