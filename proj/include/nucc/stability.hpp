#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nucc/classify.hpp"
#include "nucc/propagator.hpp"
#include "nucc/riccati.hpp"
#include "nucc/system.hpp"

namespace nucc {

// Propagator of the closed loop x' = (A(t) - B(t) F(t)) x. The returned
// propagator always integrates numerically: the plant's catalog closed form
// describes the open loop and must not leak through. Its domain is the
// intersection of the plant domain with the span of the gain schedule.
Propagator closed_loop_propagator(const SystemDef& sys,
                                  const GainSchedule& gain,
                                  const PropagatorOptions& opt = {});

// Product pair grid for envelope fits: the samples are ln||Phi(t0+g, t0)||
// for every base time t0 and every gap g. Both vectors ascending, gaps > 0.
struct StabilityGrid {
  std::vector<double> t0;
  std::vector<double> gaps;
};

// t0 over [t_lo, t_lo + span/2], gaps over [span/8, span/2], so every pair
// stays inside [t_lo, t_hi] and the longest pairs cross the whole window.
StabilityGrid stability_grid(double t_lo, double t_hi, int n_t0 = 9,
                             int n_gaps = 7);

// Decay envelope ln||Phi(t, t0)|| <= ln M + epsilon t0 - lambda (t - t0)
// fitted on a pair grid. The fit is staged, each stage an exact linear
// program on the dominating-line hull:
//   1. epsilon: the smallest source-time slope that dominates every
//      fixed-gap section of the data (max of the per-gap hull-edge slopes,
//      clamped at 0);
//   2. lambda: the steepest gap decay over the per-gap intercepts pinned at
//      that epsilon;
//   3. ln M: the least constant closing the envelope, clamped at 0 so M >= 1.
// Anchoring epsilon to the per-gap hulls keeps the constant from absorbing
// source-time growth: on a finite grid a large enough M makes any epsilon
// feasible, so "minimize epsilon subject to domination" alone would always
// return 0 and hide the nonuniformity it is supposed to measure.
//
// The inequality is verified where it was fitted (max_violation <= 0, by
// construction); decay beyond the grid is consistent with the data, not
// proved by it.
struct StabilityCertificate {
  // "stable": lambda > 0 and epsilon < lambda, the fit is a valid
  //   nonuniform-decay certificate on its grid;
  // "unstable": no decay (lambda <= 0);
  // "nonuniformity-dominates": decay exists but epsilon >= lambda, so the
  //   certificate form with epsilon in [0, lambda) is not attainable.
  std::string verdict;
  double M = 1.0;
  double ln_M = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  std::vector<std::pair<double, double>> fit_grid;  // (t, t0) pairs checked
  double max_violation = 0.0;  // max of data minus envelope; <= 0
  std::string note;

  bool accepted() const { return verdict == "stable"; }
  nlohmann::json to_json() const;
};

StabilityCertificate fit_stability(const Propagator& prop_hat,
                                   const StabilityGrid& grid);

struct T2Options {
  double slack = 0.1;       // relative slack on the rate comparisons
  RiccatiOptions riccati;   // forwarded to the shifted Riccati solve
  int n_grid = 0;           // Riccati sample count; 0 derives ~0.05 spacing
  int n_t0 = 9, n_gaps = 7; // closed-loop fit grid shape
};

// Full closed-loop pipeline at shift L: shifted Riccati solve, gain
// F = B^T S / 2, closed-loop propagator, envelope fit; then the fitted
// (lambda, epsilon) are compared against the guaranteed rate L - theta1 and
// nonuniformity theta1 + theta2, where theta1 = mu1 + 4 eta and
// theta2 = eta + 2(mu1 + mu0) come from the controllability certificate and
// the growth fit. Rejects L <= 2(theta2 + 2 theta1) (PreconditionError
// naming the threshold); a certificate with mu = 0 is accepted with a
// warning note since the strict-positivity hypothesis is relaxed there.
struct T2Report {
  double L = 0.0;
  double theta1 = 0.0, theta2 = 0.0;
  double required_L = 0.0;       // 2 (theta2 + 2 theta1), exclusive bound
  double lambda_required = 0.0;  // (L - theta1)(1 - slack)
  double epsilon_allowed = 0.0;  // (theta1 + theta2)(1 + slack) + grace
  double slack = 0.1;
  double mu0 = 0.0, mu1 = 0.0, eta = 0.0;
  StabilityCertificate closed_loop;
  bool pass = false;
  std::vector<std::string> notes;
  nlohmann::json to_json() const;
};

T2Report verify_theorem_T2(const SystemDef& sys, const NUCCCertificate& cert,
                           const GrowthFit& fit, double L, Domain horizon,
                           const T2Options& opt = {});

struct LyapunovOptions {
  unsigned long long seed = 42;
  double h_slack = 1e-6;  // relative slack on the trajectory decay check
  double fd_slack = 0.0;  // residual allowance; 0 derives it from the data's
                          // own third differences (finite-difference
                          // truncation estimate with a 3x margin)
};

struct LyapunovCheckRow {
  std::string name;
  bool checked = true;  // false: hypothesis unavailable, pass is meaningless
  bool pass = false;
  double statistic = 0.0;
  double allowance = 0.0;
  std::string note;
  nlohmann::json to_json() const;
};

// Lyapunov-function audit of a Riccati solution at shift L:
//   1. "solution-envelope": fits C1 e^{-2 phi1 t} <= eig(S) <= C2 e^{2 phi2 t}
//      on the solution grid (valid by construction) and derives the decay
//      constants lambda = L/2 - phi1, epsilon = phi1 + phi2,
//      M = max(1, sqrt(C2/C1));
//   2. "shift-hypothesis": L > 2(phi2 + 2 phi1);
//   3. "trajectory-decay[k]": H(t) = <S(t)x(t), x(t)> along closed-loop
//      trajectories from seeded random states must satisfy
//      H(t) <= e^{-L(t-tau)} H(tau) within h_slack * H(tau); one extra
//      trajectory from the zero state checks the trivial case;
//   4. "riccati-inequality": the finite-difference residual
//      dS/dt + U^T S + S U + I + L S with U = A - B F + (L/2) I must stay
//      below the allowance in the largest-eigenvalue sense. Along this
//      pipeline the residual is pure discretization error, so the default
//      allowance tracks the grid's own truncation estimate.
// Failures are reported per row, never thrown.
struct LyapunovReport {
  double L = 0.0;
  double C1 = 0.0, phi1 = 0.0, C2 = 0.0, phi2 = 0.0;
  double lambda = 0.0, epsilon = 0.0, M = 1.0;
  bool hypothesis_ok = false;
  std::vector<LyapunovCheckRow> checks;
  bool all_pass = false;
  nlohmann::json to_json() const;
};

LyapunovReport lyapunov_check(const RiccatiSolution& rs,
                              const GainSchedule& gain, const SystemDef& sys,
                              int n_trajectories,
                              const LyapunovOptions& opt = {});

enum class SpectrumMode { Uniform, Nonuniform };

struct SpectrumOptions {
  // Pair grid; empty vectors derive the defaults from the horizon: gaps over
  // [span/2, 3 span/4], base times over [t_min, t_min + span/4]. Gaps are
  // kept long so the ratios measure sustained rates, not coefficient swings.
  std::vector<double> t0_grid, gap_grid;
  int n_t0 = 13, n_gaps = 9;
  // Rates below this are treated as unresolved; <= 0 derives half the
  // median gamma step.
  double lambda_min = 0.0;
  // Matrix systems are tested as pure-stability candidates (identity
  // projector) only, and only when declared so; the growth direction would
  // need the inverse transition, which scalar systems give for free.
  bool full_projector = false;
  bool parallel = true;  // governs the (t0, gap) transition-norm table
};

// Dichotomy-spectrum estimate on a finite horizon. For each gamma the
// shifted samples w = ln||Phi(t, t0)|| - gamma (t - t0) are tested for a
// contracting envelope (identity projector) and, on scalar systems, the
// backward samples for an expanding one (zero projector).
//
// Uniform mode asks for contraction with unit constant: the decision
// statistics are the extreme ratios w / gap over the pair grid, so the
// no-dichotomy set is exactly the gamma range swept by the data's growth
// rates. Nonuniform mode runs the staged envelope fit of fit_stability per
// side and accepts a side when its rate clears lambda_min and its fitted
// nonuniformity epsilon stays strictly below the rate. Verdict "inconclusive"
// marks gammas whose best rate is positive but below the lambda_min
// resolution. Intervals collect maximal runs of "no-dichotomy" gammas.
//
// All per-gamma statistics are exact affine shifts of a single gamma-free
// fit (shifting moves every sample by -gamma * gap), so the verdict
// boundaries are monotone in gamma and the transition-norm table is the
// only expensive step.
struct SpectrumEstimate {
  std::string mode;  // "uniform" | "nonuniform"
  std::vector<double> gamma_grid;
  std::vector<std::string> verdicts;    // dichotomy | no-dichotomy | inconclusive
  std::vector<std::string> projectors;  // identity | zero | ""
  // Decay margins per gamma: rate of the contracting fit and of the
  // expanding fit (NaN where a side is unavailable).
  std::vector<double> lambda_stable, lambda_unstable;
  double eps_stable = 0.0, eps_unstable = 0.0;  // fitted once, gamma-free
  std::vector<std::pair<double, double>> intervals;  // closed, disjoint, sorted
  std::vector<double> t0_grid, gap_grid;
  double lambda_min = 0.0;

  nlohmann::json to_json() const;
  std::string csv() const;  // gamma,verdict,projector,lambda_stable,lambda_unstable
};

SpectrumEstimate estimate_spectrum(const Propagator& prop,
                                   const std::vector<double>& gamma_grid,
                                   double horizon, SpectrumMode mode,
                                   const SpectrumOptions& opt = {});

// Multiples of step covering [lo, hi]; snapping to multiples keeps rational
// landmarks (integers, halves) exactly on the grid.
std::vector<double> gamma_range(double lo, double hi, double step = 0.05);

}  // namespace nucc
