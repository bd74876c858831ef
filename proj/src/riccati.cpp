#include "nucc/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "nucc/errors.hpp"
#include "nucc/ode.hpp"

namespace nucc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

// upper-triangle flattening; keeps the samples bitwise symmetric
int tri_size(int n) { return n * (n + 1) / 2; }

void pack(const Eigen::MatrixXd& S, Eigen::VectorXd& y) {
  const int n = static_cast<int>(S.rows());
  y.resize(tri_size(n));
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) y[k++] = S(i, j);
}

void unpack(const Eigen::VectorXd& y, int n, Eigen::MatrixXd& S) {
  S.resize(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      S(i, j) = y[k];
      S(j, i) = y[k];
      ++k;
    }
}

double eig_min_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double eig_max_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string matrix_series_csv(const std::vector<double>& ts,
                              const std::vector<Eigen::MatrixXd>& Ms,
                              const char* prefix) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t";
  if (!Ms.empty())
    for (Eigen::Index i = 0; i < Ms[0].rows(); ++i)
      for (Eigen::Index j = 0; j < Ms[0].cols(); ++j)
        os << "," << prefix << "_" << i << j;
  os << "\n";
  for (size_t k = 0; k < ts.size(); ++k) {
    os << ts[k];
    for (Eigen::Index i = 0; i < Ms[k].rows(); ++i)
      for (Eigen::Index j = 0; j < Ms[k].cols(); ++j) os << "," << Ms[k](i, j);
    os << "\n";
  }
  return os.str();
}

// index of t in a sorted grid, or -1; exact matches only
long grid_index(const std::vector<double>& grid, double t) {
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  if (it != grid.end() && *it == t) return it - grid.begin();
  return -1;
}

struct RiccatiRhs {
  const TimeMatrix* A;
  const TimeMatrix* B;
  double L;
  int n;
  mutable Eigen::MatrixXd S, Am, Bm, M, SB, dS;

  void operator()(double t, const Eigen::VectorXd& y,
                  Eigen::VectorXd& dy) const {
    unpack(y, n, S);
    A->eval(t, Am);
    B->eval(t, Bm);
    Am.diagonal().array() += L;
    M = Am.transpose() * S;  // (A + L I)^T S; S symmetric by unpack
    SB = S * Bm;
    dS = SB * SB.transpose() - (M + M.transpose());
    dS.diagonal().array() -= 1.0;
    pack(dS, dy);
  }
};

// ln(1 + (1 + e^z)^2) without overflowing for large z
double ln_one_plus_sq(double z) {
  if (z > 18.0) return 2.0 * z;
  const double b = 1.0 + std::exp(z);
  return std::log1p(b * b);
}

}  // namespace

Eigen::MatrixXd RiccatiSolution::at(double t) const {
  if (t_grid.empty()) throw PreconditionError("RiccatiSolution: no samples");
  if (t < t_grid.front() || t > t_grid.back())
    throw PreconditionError("RiccatiSolution: query outside the sample range");
  const long exact = grid_index(t_grid, t);
  if (exact >= 0) return S[exact];
  auto hi = std::upper_bound(t_grid.begin(), t_grid.end(), t);
  const size_t i1 = hi - t_grid.begin();
  const size_t i0 = i1 - 1;
  const double w = (t - t_grid[i0]) / (t_grid[i1] - t_grid[i0]);
  return S[i0] + w * (S[i1] - S[i0]);
}

void RiccatiSolution::require_valid() const {
  if (t_grid.empty() || S.size() != t_grid.size())
    throw Error("RiccatiSolution: sample/grid mismatch");
  for (size_t i = 0; i < S.size(); ++i) {
    const double em = eig_min_sym(S[i]);
    if (!(em > 0.0))
      throw Error("RiccatiSolution: sample at t = " +
                  std::to_string(t_grid[i]) + " is not positive definite");
  }
  if (!(convergence_gap <= tol))
    throw Error("RiccatiSolution: convergence gap above tolerance");
  if (!(residual <= 1e-4))
    throw Error("RiccatiSolution: equation residual above 1e-4");
  // integration noise on the round-to-round differences scales with the
  // solution magnitude, so the monotonicity floor does too
  double scale = 1.0;
  for (const auto& s : S) scale = std::max(scale, s.cwiseAbs().maxCoeff());
  if (!(monotonicity_defect >= -1e-8 * scale))
    throw Error("RiccatiSolution: backward solutions not monotone in the "
                "terminal time");
}

RiccatiSolution solve_riccati(const SystemDef& sys, double L,
                              std::vector<double> t_grid,
                              const RiccatiOptions& opt) {
  sys.validate();
  if (!(L > 0.0)) throw PreconditionError("solve_riccati: needs L > 0");
  if (t_grid.empty()) throw PreconditionError("solve_riccati: empty grid");
  if (!(opt.tol > 0.0) || !(opt.step_tol > 0.0) || !(opt.t1_step > 0.0))
    throw PreconditionError("solve_riccati: tolerances and t1_step must be "
                            "positive");
  if (!(opt.quiet_span >= 0.0))
    throw PreconditionError("solve_riccati: quiet_span must be nonnegative");
  std::sort(t_grid.begin(), t_grid.end());
  t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());
  for (double t : t_grid) sys.domain.require(t, "solve_riccati");

  const int n = sys.state_dim;
  const double t_hi = t_grid.back();

  // finite-difference stencil per grid point for the residual; one-sided
  // when the centered stencil would leave the domain on the left
  const double h = 1e-3;
  std::vector<std::vector<double>> stencils(t_grid.size());
  std::set<double> sample_set(t_grid.begin(), t_grid.end());
  for (size_t j = 0; j < t_grid.size(); ++j) {
    const double t = t_grid[j];
    const bool centered = t - 2.0 * h >= sys.domain.t_min;
    if (centered)
      stencils[j] = {t - 2.0 * h, t - h, t + h, t + 2.0 * h};
    else
      stencils[j] = {t, t + h, t + 2.0 * h, t + 3.0 * h, t + 4.0 * h};
    sample_set.insert(stencils[j].begin(), stencils[j].end());
  }
  const std::vector<double> ts_asc(sample_set.begin(), sample_set.end());
  std::vector<double> ts_desc(ts_asc.rbegin(), ts_asc.rend());

  RiccatiRhs rhs{sys.A.get(), sys.B.get(), L, n, {}, {}, {}, {}, {}, {}};
  ode::Options oopt;
  oopt.rel_tol = opt.step_tol;
  oopt.abs_tol = 1e-13;
  oopt.norm_cap = opt.norm_cap;

  RiccatiSolution rs;
  rs.L = L;
  rs.t_grid = t_grid;
  rs.tol = opt.tol;

  // ys is aligned with ts_desc; look the time up in the ascending mirror
  auto sample_at = [&](const std::vector<Eigen::VectorXd>& ys, double t) {
    const auto it = std::lower_bound(ts_asc.begin(), ts_asc.end(), t);
    const size_t ai = it - ts_asc.begin();
    const size_t di = ts_desc.size() - 1 - ai;
    Eigen::MatrixXd S;
    unpack(ys[di], n, S);
    return S;
  };

  std::vector<Eigen::MatrixXd> prev_grid;
  std::vector<Eigen::VectorXd> final_samples;
  bool converged = false;
  // t1 of the last round whose gap exceeded tol; the tail of an oscillatory
  // system can go quiet for a while and revive, so a single small gap proves
  // nothing until a quiet_span of terminal times has passed without activity
  double last_active_t1 = t_hi;
  for (int round = 0; round < opt.max_rounds && !converged; ++round) {
    const double t1 = t_hi + (round + 1) * opt.t1_step;
    if (!sys.domain.contains(t1))
      throw PreconditionError(
          "solve_riccati: terminal-time escalation leaves the system domain; "
          "the limit construction needs an unbounded (or long) domain");
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(tri_size(n));
    std::vector<Eigen::VectorXd> ys;
    try {
      auto f = [&rhs](double t, const Eigen::VectorXd& y,
                      Eigen::VectorXd& dy) { rhs(t, y, dy); };
      ys = ode::sample(f, t1, std::move(y0), ts_desc, oopt);
    } catch (const GrowthOverflowError& e) {
      throw StiffnessError(
          "solve_riccati: backward integration blew up near t = " +
              std::to_string(e.blow_up_time) +
              "; reduce L or tighten the step tolerance",
          e.blow_up_time);
    }

    std::vector<Eigen::MatrixXd> cur(t_grid.size());
    for (size_t j = 0; j < t_grid.size(); ++j)
      cur[j] = sample_at(ys, t_grid[j]);

    rs.t1_sequence.push_back(t1);
    if (!prev_grid.empty()) {
      double gap = 0.0;
      for (size_t j = 0; j < cur.size(); ++j) {
        gap = std::max(gap,
                       (cur[j] - prev_grid[j]).cwiseAbs().maxCoeff());
        rs.monotonicity_defect =
            std::min(rs.monotonicity_defect,
                     eig_min_sym(cur[j] - prev_grid[j]));
      }
      rs.gap_sequence.push_back(gap);
      if (gap > opt.tol) last_active_t1 = t1;
      converged = gap <= opt.tol && t1 - last_active_t1 >= opt.quiet_span;
    }
    prev_grid = std::move(cur);
    if (converged) final_samples = std::move(ys);
  }
  // report the worst gap over the trailing quiet window: on success that is
  // the certified stall level, on failure the activity the budget ran out on
  {
    double window_gap = 0.0;
    const double t1_last = rs.t1_sequence.back();
    for (size_t k = 1; k < rs.t1_sequence.size(); ++k)
      if (rs.t1_sequence[k] > t1_last - opt.quiet_span)
        window_gap = std::max(window_gap, rs.gap_sequence[k - 1]);
    if (rs.gap_sequence.empty()) window_gap = std::numeric_limits<double>::quiet_NaN();
    rs.convergence_gap = window_gap;
  }
  if (!converged)
    throw ConvergenceError(
        "solve_riccati: " + std::to_string(opt.max_rounds) +
            " terminal-time extensions did not close the gap",
        rs.convergence_gap);
  rs.S = std::move(prev_grid);

  // equation defect from the converged samples, fourth-order differences
  Eigen::MatrixXd Am(n, n), Bm(n, sys.input_dim);
  for (size_t j = 0; j < t_grid.size(); ++j) {
    const double t = t_grid[j];
    const auto& st = stencils[j];
    Eigen::MatrixXd Sdot;
    if (st.size() == 4) {
      Sdot = (sample_at(final_samples, st[0]) -
              8.0 * sample_at(final_samples, st[1]) +
              8.0 * sample_at(final_samples, st[2]) -
              sample_at(final_samples, st[3])) /
             (12.0 * h);
    } else {
      Sdot = (-25.0 * sample_at(final_samples, st[0]) +
              48.0 * sample_at(final_samples, st[1]) -
              36.0 * sample_at(final_samples, st[2]) +
              16.0 * sample_at(final_samples, st[3]) -
              3.0 * sample_at(final_samples, st[4])) /
             (12.0 * h);
    }
    sys.A->eval(t, Am);
    sys.B->eval(t, Bm);
    Am.diagonal().array() += L;
    const Eigen::MatrixXd& Sj = rs.S[j];
    const Eigen::MatrixXd M = Am.transpose() * Sj;
    const Eigen::MatrixXd SB = Sj * Bm;
    Eigen::MatrixXd R = Sdot + M + M.transpose() - SB * SB.transpose();
    R.diagonal().array() += 1.0;
    const double scale = 1.0 + 2.0 * M.norm() +
                         (SB * SB.transpose()).norm() + std::sqrt(double(n));
    rs.residual = std::max(rs.residual, R.norm() / scale);
  }

  rs.require_valid();
  return rs;
}

nlohmann::json RiccatiSolution::to_json() const {
  nlohmann::json j;
  j["L"] = L;
  j["tol"] = tol;
  j["t_grid"] = t_grid;
  j["t1_sequence"] = t1_sequence;
  j["gap_sequence"] = gap_sequence;
  j["convergence_gap"] = convergence_gap;
  j["residual"] = residual;
  j["monotonicity_defect"] = monotonicity_defect;
  auto samples = nlohmann::json::array();
  for (const auto& m : S) samples.push_back(matrix_json(m));
  j["S"] = std::move(samples);
  return j;
}

std::string RiccatiSolution::csv() const {
  return matrix_series_csv(t_grid, S, "S");
}

Eigen::MatrixXd GainSchedule::at(double t) const {
  if (t_grid.empty()) throw PreconditionError("GainSchedule: no samples");
  if (t < t_grid.front() || t > t_grid.back())
    throw PreconditionError("GainSchedule: query outside the covered range");
  const long exact = grid_index(t_grid, t);
  if (exact >= 0) return F[exact];
  auto hi = std::upper_bound(t_grid.begin(), t_grid.end(), t);
  const size_t i1 = hi - t_grid.begin();
  const size_t i0 = i1 - 1;
  const double w = (t - t_grid[i0]) / (t_grid[i1] - t_grid[i0]);
  const Eigen::MatrixXd Si = S[i0] + w * (S[i1] - S[i0]);
  return 0.5 * (*B)(t).transpose() * Si;
}

nlohmann::json GainSchedule::to_json() const {
  nlohmann::json j;
  j["L"] = L;
  j["t_grid"] = t_grid;
  auto samples = nlohmann::json::array();
  for (const auto& m : F) samples.push_back(matrix_json(m));
  j["F"] = std::move(samples);
  return j;
}

std::string GainSchedule::csv() const {
  return matrix_series_csv(t_grid, F, "F");
}

GainSchedule feedback_gain(const RiccatiSolution& rs, const SystemDef& sys) {
  sys.validate();
  if (rs.t_grid.empty() || rs.S.empty())
    throw PreconditionError("feedback_gain: empty Riccati solution");
  if (sys.state_dim != rs.S[0].rows())
    throw PreconditionError("feedback_gain: system/solution dimension "
                            "mismatch");
  GainSchedule g;
  g.L = rs.L;
  g.t_grid = rs.t_grid;
  g.S = rs.S;
  g.B = sys.B;
  g.F.reserve(rs.t_grid.size());
  Eigen::MatrixXd Bm(sys.state_dim, sys.input_dim);
  for (size_t j = 0; j < rs.t_grid.size(); ++j) {
    sys.B->eval(rs.t_grid[j], Bm);
    g.F.push_back(0.5 * Bm.transpose() * rs.S[j]);
  }
  return g;
}

nlohmann::json BandCheck::to_json() const {
  return nlohmann::json{{"checked", checked},       {"pass", pass},
                        {"measured_lo", measured_lo}, {"bound_lo", bound_lo},
                        {"measured_hi", measured_hi}, {"bound_hi", bound_hi},
                        {"note", note}};
}

BandCheck check_shifted_band(const NUCCCertificate& cert,
                             const GramianResult& wl, double ell, double t,
                             double sigma, double slack) {
  if (slack < 1.0)
    throw PreconditionError("check_shifted_band: slack must be >= 1");
  if (!(ell > 0.0))
    throw PreconditionError("check_shifted_band: needs ell > 0");
  BandCheck bc;
  if (cert.verdict != "UCC" && cert.verdict != "NUCC") {
    bc.note = "certificate verdict '" + cert.verdict +
              "' does not certify the window envelopes";
    return bc;
  }
  const double s0 = cert.sigma0_at(t);
  if (!(sigma >= s0)) {
    bc.note = "sigma below the certified reach threshold";
    return bc;
  }
  const double la0 = cert.ln_alpha0_at(sigma);
  const double la1 = cert.ln_alpha1_at(sigma);
  if (!std::isfinite(la0) || !std::isfinite(la1)) {
    bc.note = "certificate envelope table has no finite value at this sigma";
    return bc;
  }
  bc.checked = true;
  const double lns = std::log(slack);
  bc.bound_lo = la0 - 2.0 * ell * sigma - 2.0 * cert.mu0 * t - lns;
  bc.bound_hi = la1 + 2.0 * cert.mu1 * t + lns;
  bc.measured_lo = safe_log(wl.eig_min);
  bc.measured_hi = safe_log(wl.eig_max);
  bc.pass = bc.measured_lo >= bc.bound_lo && bc.measured_hi <= bc.bound_hi;
  return bc;
}

double gamma1_shifted(const GrowthFit& fit, double ell, double sigma) {
  const double al = fit.a + ell;
  const double den = 2.0 * fit.K0 * fit.K0 * (al + fit.eta);
  if (den <= 0.0) return sigma / (fit.K0 * fit.K0);  // al = eta = 0 limit
  return -std::expm1(-2.0 * al * sigma) / den;
}

double gamma2_shifted(const GrowthFit& fit, double ell, double sigma) {
  const double al = fit.a + ell;
  const double k2 = fit.K0 * fit.K0;
  if (al <= 0.0) return k2 * sigma;
  if (2.0 * al * sigma > 500.0)  // expm1 would overflow; drop the -1
    return k2 * std::exp(2.0 * al * sigma - std::log(2.0 * al));
  return k2 * std::expm1(2.0 * al * sigma) / (2.0 * al);
}

BandCheck check_y_band(const GrowthFit& fit, const GramianResult& y,
                       double ell, double t, double sigma, double slack) {
  if (slack < 1.0)
    throw PreconditionError("check_y_band: slack must be >= 1");
  if (ell < 0.0) throw PreconditionError("check_y_band: needs ell >= 0");
  BandCheck bc;
  bc.checked = true;
  const double g1 = gamma1_shifted(fit, ell, sigma);
  const double g2 = gamma2_shifted(fit, ell, sigma);
  const double lns = std::log(slack);
  bc.bound_lo = (g1 > 0.0 ? std::log(g1) : -kInf) - 2.0 * fit.eta * t - lns;
  bc.bound_hi = std::log(g2) + 2.0 * fit.eta * t + lns;
  bc.measured_lo = safe_log(y.eig_min);
  bc.measured_hi = safe_log(y.eig_max);
  bc.pass = bc.measured_lo >= bc.bound_lo && bc.measured_hi <= bc.bound_hi;
  if (!(g1 > 0.0)) bc.note = "lower window constant degenerates to zero";
  return bc;
}

nlohmann::json SandwichReport::to_json() const {
  nlohmann::json j;
  j["t"] = t;
  j["sigma"] = sigma;
  j["L"] = L;
  j["checked"] = checked;
  j["pass"] = pass;
  j["note"] = note;
  j["margin_lower"] = margin_lower;
  j["margin_upper"] = margin_upper;
  if (checked) {
    j["D"] = matrix_json(D);
    j["E"] = matrix_json(E);
    j["S"] = matrix_json(S);
  }
  j["theta_checked"] = theta_checked;
  j["theta_pass"] = theta_pass;
  j["theta1"] = theta1;
  j["theta2"] = theta2;
  j["ln_N"] = ln_N;
  j["ln_M"] = ln_M;
  return j;
}

SandwichReport s_sandwich(const Propagator& prop, const NUCCCertificate& cert,
                          const GrowthFit& fit, const RiccatiSolution& rs,
                          double t, double sigma, double slack, double tol) {
  if (slack < 1.0)
    throw PreconditionError("s_sandwich: slack must be >= 1");
  SandwichReport rep;
  rep.t = t;
  rep.sigma = sigma;
  rep.L = rs.L;
  rep.S = rs.at(t);  // throws when t is outside the solved range

  const double s0 = cert.sigma0_at(t);
  if (!std::isfinite(s0)) {
    rep.note = "no reach threshold at t: the window gramian never becomes "
               "positive definite, so the sandwich is unavailable";
    return rep;
  }
  if (sigma < s0) {
    rep.note = "sigma below the certified reach threshold sigma0(t)";
    return rep;
  }

  const double ell = rs.L / 2.0;
  const auto wl = shifted_gramian(prop, ell, t, sigma, tol);
  const auto yl = y_integral(prop, ell, t, sigma, tol);
  if (!(wl.eig_min > 0.0) ||
      wl.eig_min <= 1e-14 * std::max(1.0, wl.eig_max)) {
    rep.note = "shifted window gramian is numerically singular";
    return rep;
  }

  const int n = prop.dim();
  const double trW = wl.matrix.trace(), trY = yl.matrix.trace();
  Eigen::MatrixXd Yinv = yl.matrix.inverse();
  Yinv = 0.5 * (Yinv + Yinv.transpose()).eval();
  Eigen::MatrixXd Winv = wl.matrix.inverse();
  Winv = 0.5 * (Winv + Winv.transpose()).eval();
  const double cd = trW * std::pow(1.0 + trY / yl.eig_min, 2);
  const double ce = trY * std::pow(1.0 + trW / wl.eig_min, 2);
  rep.D = Yinv + cd * Eigen::MatrixXd::Identity(n, n);
  rep.E = Winv + ce * Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd Dinv = rep.D.inverse();
  Dinv = 0.5 * (Dinv + Dinv.transpose()).eval();
  rep.margin_lower = eig_min_sym(rep.S - Dinv);
  rep.margin_upper = eig_min_sym(rep.E - rep.S);
  const double grace = 1e-8 * std::max(1.0, eig_max_sym(rep.S));
  rep.checked = true;
  rep.pass = rep.margin_lower >= -grace && rep.margin_upper >= -grace;
  if (!rep.pass)
    rep.note = "sandwich violated: suspect an unconverged Riccati solve or a "
               "stale certificate";

  if (cert.verdict != "UCC" && cert.verdict != "NUCC") {
    rep.note += (rep.note.empty() ? "" : "; ");
    rep.note += "certificate verdict '" + cert.verdict +
                "' leaves the decay envelopes uncertified";
    return rep;
  }
  const double ln_a0 = cert.ln_alpha0_at(sigma);
  const double ln_a1 = cert.ln_alpha1_at(sigma);
  const double g1 = gamma1_shifted(fit, ell, sigma);
  const double g2 = gamma2_shifted(fit, ell, sigma);
  if (!std::isfinite(ln_a0) || !std::isfinite(ln_a1) || !(g1 > 0.0)) {
    rep.note += (rep.note.empty() ? "" : "; ");
    rep.note += "envelope constants unavailable at this sigma";
    return rep;
  }
  const double ln_g1 = std::log(g1), ln_g2 = std::log(g2);
  const double ln_n = std::log(double(n));
  rep.theta1 = cert.mu1 + 4.0 * fit.eta;
  rep.theta2 = fit.eta + 2.0 * (cert.mu1 + cert.mu0);
  // envelope constants assembled in ln scale so stiff shifts cannot overflow
  const double ln_Ninv = std::max(-ln_g1, ln_n + ln_a1) +
                         ln_one_plus_sq(ln_n + ln_g2 - ln_g1);
  const double ln_Mth = std::max(rs.L * sigma - ln_a0, ln_n + ln_g2) +
                        ln_one_plus_sq(ln_n + ln_a1 + rs.L * sigma - ln_a0);
  rep.ln_N = -ln_Ninv;
  rep.ln_M = ln_Mth;
  rep.ln_eigmin_Dinv = safe_log(eig_min_sym(Dinv));
  rep.ln_eigmax_E = safe_log(eig_max_sym(rep.E));
  const double lns = std::log(slack);
  rep.theta_checked = true;
  rep.theta_pass =
      rep.ln_eigmin_Dinv >= rep.ln_N - 2.0 * rep.theta1 * t - lns &&
      rep.ln_eigmax_E <= rep.ln_M + 2.0 * rep.theta2 * t + lns;
  return rep;
}

}  // namespace nucc
