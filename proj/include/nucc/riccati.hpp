#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "json.hpp"
#include "nucc/classify.hpp"
#include "nucc/gramian.hpp"
#include "nucc/propagator.hpp"
#include "nucc/system.hpp"

namespace nucc {

struct RiccatiOptions {
  double tol = 1e-8;        // escalation stopping tolerance, max norm on grid
  double step_tol = 1e-10;  // integrator relative tolerance
  double t1_step = 1.0;     // terminal-time increment per round
  // A single small round-to-round gap is not proof of convergence: an
  // oscillatory coefficient can silence the tail for a while and revive it
  // later (A = -2 - t sin t does, with period 2 pi). Convergence is declared
  // only after the gap stays below tol for a trailing window of terminal
  // times at least this long. Must exceed the longest dormancy of the
  // coefficients; the default covers 2 pi-periodic ones.
  double quiet_span = 8.0;
  int max_rounds = 60;
  // ||S|| above this aborts the solve as stiffness. Backward solutions can
  // pass through genuinely huge transients that still converge (the plant
  // -2 - t sin t spikes past 1e11 between oscillation lobes), so the default
  // only guards against overflow: the equation squares S, so the cap must
  // keep ||S||^2 representable.
  double norm_cap = 1e120;
};

// S_L(t): limit of the backward solutions Pi(., t1) of
//   S' + (A + L I)^T S + S (A + L I) - S B B^T S = -I,   Pi(t1) = 0,
// as the terminal time t1 grows. Terminal times escalate in steps of
// t1_step until the samples on t_grid move by at most tol across a trailing
// quiet_span of terminal times; the rounds are sequential because each
// stopping test compares against the previous terminal time. Symmetry is
// structural (the integrator works on the upper triangle), so samples are
// bitwise symmetric.
struct RiccatiSolution {
  double L = 0.0;
  std::vector<double> t_grid;
  std::vector<Eigen::MatrixXd> S;   // symmetric PD, aligned with t_grid
  std::vector<double> t1_sequence;  // terminal times actually used
  std::vector<double> gap_sequence;  // max-norm grid change per escalation
  double convergence_gap = 0.0;      // last entry of gap_sequence
  double residual = 0.0;  // max relative equation defect, finite differences
  double monotonicity_defect = 0.0;  // most negative eig of round-to-round
                                     // differences; the limit construction
                                     // needs this ~ 0 from below
  double tol = 1e-8;

  // Linear interpolation between samples, exact at grid points. Queries
  // outside the grid range throw PreconditionError.
  Eigen::MatrixXd at(double t) const;

  // Throws Error when a structural contract is broken: PD samples,
  // convergence_gap <= tol, residual <= 1e-4, monotonicity >= -1e-8.
  void require_valid() const;

  nlohmann::json to_json() const;
  std::string csv() const;  // t, vec(S) row-major
};

RiccatiSolution solve_riccati(const SystemDef& sys, double L,
                              std::vector<double> t_grid,
                              const RiccatiOptions& opt = {});

// F(t) = 1/2 B^T(t) S_L(t); samples are the exact formula at grid points.
// Off-grid queries interpolate S linearly, then apply the formula at the
// queried time.
struct GainSchedule {
  double L = 0.0;
  std::vector<double> t_grid;
  std::vector<Eigen::MatrixXd> F;  // input_dim x state_dim
  std::vector<Eigen::MatrixXd> S;  // retained for off-grid interpolation
  TimeMatrixPtr B;

  Eigen::MatrixXd at(double t) const;
  nlohmann::json to_json() const;
  std::string csv() const;  // t, vec(F) row-major
};

GainSchedule feedback_gain(const RiccatiSolution& rs, const SystemDef& sys);

// One-window comparison of measured gramian eigenvalues against an
// analytically implied band, within a multiplicative slack. checked=false
// means the hypothesis needed to form the band was not available; pass is
// meaningful only when checked.
struct BandCheck {
  bool checked = false;
  bool pass = false;
  double measured_lo = 0, bound_lo = 0;  // ln scale
  double measured_hi = 0, bound_hi = 0;
  std::string note;
  nlohmann::json to_json() const;
};

// Damped window W_ell against the certificate band
//   alpha0(sigma) e^{-2 ell sigma} e^{-2 mu0 t} <= eig <= alpha1(sigma) e^{2 mu1 t}.
// Needs a certified verdict (UCC or NUCC) and sigma >= sigma0(t).
BandCheck check_shifted_band(const NUCCCertificate& cert,
                             const GramianResult& wl, double ell, double t,
                             double sigma, double slack = 10.0);

// Explicit window constants for the squared-flow integral of the plant
// shifted by ell, from growth constants (K0, a, eta):
//   gamma1 = [1 - e^{-2(a+ell) sigma}] / (2 K0^2 (a + ell + eta))
//   gamma2 = K0^2 [e^{2(a+ell) sigma} - 1] / (2 (a + ell))
// with the a + ell -> 0 limits filled in continuously.
double gamma1_shifted(const GrowthFit& fit, double ell, double sigma);
double gamma2_shifted(const GrowthFit& fit, double ell, double sigma);

// Y_ell against gamma1 e^{-2 eta t} <= eig <= gamma2 e^{2 eta t}.
BandCheck check_y_band(const GrowthFit& fit, const GramianResult& y,
                       double ell, double t, double sigma,
                       double slack = 10.0);

// Two-sided matrix bound on the Riccati solution from window quantities at
// shift L/2, with W = W_{L/2}(t, t+sigma) and Y = Y_{L/2}(t, t+sigma):
//   D = Y^{-1} + tr(W) (1 + tr(Y)/eig_min(Y))^2 I
//   E = W^{-1} + tr(Y) (1 + tr(W)/eig_min(W))^2 I
//   D^{-1} <= S_L(t) <= E.
// The theta-form decay envelopes are also evaluated when the certificate
// is UCC or NUCC: with theta1 = mu1 + 4 eta, theta2 = eta + 2(mu1 + mu0),
// explicit constants N, M derived from the band constants must satisfy
//   N e^{-2 theta1 t} <= eig_min(D^{-1}),  eig_max(E) <= M e^{2 theta2 t}
// within the slack. A window where the hypotheses fail (sigma below the
// reach threshold, singular W) is reported with checked=false, not thrown.
struct SandwichReport {
  double t = 0, sigma = 0, L = 0;
  bool checked = false;
  bool pass = false;  // D^{-1} <= S <= E within numerical grace
  std::string note;
  Eigen::MatrixXd D, E, S;
  double margin_lower = 0;  // eig_min(S - D^{-1})
  double margin_upper = 0;  // eig_min(E - S)
  bool theta_checked = false, theta_pass = false;
  double theta1 = 0, theta2 = 0;
  double ln_N = 0, ln_M = 0;
  double ln_eigmin_Dinv = 0, ln_eigmax_E = 0;
  nlohmann::json to_json() const;
};

SandwichReport s_sandwich(const Propagator& prop, const NUCCCertificate& cert,
                          const GrowthFit& fit, const RiccatiSolution& rs,
                          double t, double sigma, double slack = 10.0,
                          double tol = 1e-9);

}  // namespace nucc
