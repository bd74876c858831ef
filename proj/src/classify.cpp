#include "nucc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "nucc/envelope.hpp"
#include "nucc/errors.hpp"
#include "nucc/gramian.hpp"

namespace nucc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

struct PairSample {
  double t, tau, gap, ln;
};

// quantized so cross-grid pairs at equal separation share a bucket
long quantize(double v) { return std::llround(v * 1e6); }

std::vector<PairSample> collect_pairs(const Propagator& prop,
                                      const std::vector<double>& t_grid,
                                      const std::vector<double>& tau_grid) {
  std::vector<PairSample> out;
  out.reserve(t_grid.size() * tau_grid.size());
  for (double tau : tau_grid)
    for (double t : t_grid) {
      if (t == tau) continue;
      out.push_back(
          {t, tau, std::abs(t - tau), prop.log_norm_transition(t, tau)});
    }
  return out;
}

struct EnvelopeFit {
  double a = 0, eta = 0, ln_k0 = 0, residual = 0;
};

// three stages: gap exponent from per-source dominating lines, source-time
// exponent from the resulting intercepts, then exact intercept inflation
EnvelopeFit fit_envelope(const std::vector<PairSample>& smp) {
  EnvelopeFit f;
  if (smp.empty()) return f;
  std::map<long, std::vector<size_t>> by_tau;
  for (size_t i = 0; i < smp.size(); ++i)
    by_tau[quantize(smp[i].tau)].push_back(i);
  for (const auto& [key, idx] : by_tau) {
    std::vector<double> g, y;
    g.reserve(idx.size());
    for (size_t i : idx) {
      g.push_back(smp[i].gap);
      y.push_back(smp[i].ln);
    }
    f.a = std::max(f.a, env::upper_line(g, y).slope);
  }
  f.a = std::max(f.a, 0.0);
  std::vector<double> taus, cs;
  for (const auto& [key, idx] : by_tau) {
    double c = -kInf;
    for (size_t i : idx) c = std::max(c, smp[i].ln - f.a * smp[i].gap);
    taus.push_back(smp[idx.front()].tau);
    cs.push_back(c);
  }
  const env::Line line =
      taus.size() >= 2 ? env::upper_line(taus, cs) : env::Line{cs.front(), 0.0};
  f.eta = std::max(line.slope, 0.0);
  f.ln_k0 = line.intercept;
  double worst = -kInf;
  for (const auto& s : smp)
    worst = std::max(worst, s.ln - (f.ln_k0 + f.eta * s.tau + f.a * s.gap));
  if (worst > 0) f.ln_k0 += worst;
  f.ln_k0 = std::max(f.ln_k0, 0.0);  // K0 >= 1
  f.residual = -kInf;
  for (const auto& s : smp)
    f.residual =
        std::max(f.residual, s.ln - (f.ln_k0 + f.eta * s.tau + f.a * s.gap));
  return f;
}

// monotone (within 1%) growth by a cumulative factor >= 2 across the nested
// refits, still climbing at the last one; a falsification heuristic, not a
// proof of divergence. The last-increment condition matters: thin large-gap
// buckets inflate individual slopes, but that inflation saturates, whereas
// genuine fence-proportional growth keeps adding at every extension.
bool diverging(const std::vector<double>& v) {
  if (v.size() < 4) return false;
  for (size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] < v[i] * 0.99) return false;
  if (!(v.back() - v.front() > 1e-6 && v.back() >= 2.0 * v.front()))
    return false;
  return v.back() - v[v.size() - 2] > 0.15 * v.back();
}

struct NkConfig {
  std::vector<double> gap_fences;
  std::vector<double> beta_probes;
};

NonuniformKalmanResult nk_impl(const Propagator& prop,
                               const std::vector<double>& t_grid,
                               const std::vector<double>& tau_grid,
                               NkConfig cfg) {
  NonuniformKalmanResult res;
  auto smp = collect_pairs(prop, t_grid, tau_grid);
  if (smp.empty()) throw PreconditionError("check_nonuniform_kalman: no pairs");

  std::map<long, std::vector<size_t>> buckets;
  for (size_t i = 0; i < smp.size(); ++i)
    buckets[quantize(smp[i].gap)].push_back(i);

  // per-gap slope of ln-norm against the source time
  std::map<double, double> slope_by_gap;
  for (const auto& [key, idx] : buckets) {
    std::vector<double> taus, ys;
    for (size_t i : idx) {
      taus.push_back(smp[i].tau);
      ys.push_back(smp[i].ln);
    }
    slope_by_gap[smp[idx.front()].gap] = env::upper_line(taus, ys).slope;
  }
  if (slope_by_gap.empty())
    throw PreconditionError(
        "check_nonuniform_kalman: no gap bucket has two source times");

  if (cfg.gap_fences.empty()) {
    const double gmax = slope_by_gap.rbegin()->first;
    cfg.gap_fences = {0.25 * gmax, 0.5 * gmax, 0.75 * gmax, gmax};
  }
  std::sort(cfg.gap_fences.begin(), cfg.gap_fences.end());
  res.gap_fences = cfg.gap_fences;
  for (double fence : cfg.gap_fences) {
    double nu = 0;
    for (const auto& [g, s] : slope_by_gap)
      if (g <= fence + 1e-12) nu = std::max(nu, s);
    res.nu_by_extension.push_back(nu);
  }
  res.nu = res.nu_by_extension.front();
  res.holds = !diverging(res.nu_by_extension);

  for (const auto& [key, idx] : buckets) {
    double lna = -kInf;
    for (size_t i : idx) lna = std::max(lna, smp[i].ln - res.nu * smp[i].tau);
    res.gap_table.push_back(smp[idx.front()].gap);
    res.ln_alpha_table.push_back(lna);
  }

  if (!res.holds && res.nu > 1e-9) {
    const Domain& dom = prop.system().domain;
    for (double beta : cfg.beta_probes) {
      const double gap = 3.0 * res.nu;
      const double denom = 2.0 * beta - gap;
      const double tn = beta - gap;
      if (denom <= 0 || !dom.contains(tn) || !dom.contains(beta)) continue;
      const double lhs = prop.log_norm_transition(tn, beta);
      NonuniformKalmanResult::ContradictionRow row;
      row.beta = beta;
      row.statistic = (2.0 * lhs - 2.0 * res.nu * beta) / denom;
      row.allowance = 2.0 * res.ln_alpha(gap) / denom;
      row.margin = row.allowance - row.statistic;
      res.contradiction.push_back(row);
    }
  }
  return res;
}

}  // namespace

GrowthFit fit_bounded_growth(const Propagator& prop,
                             const std::vector<double>& t_grid,
                             const std::vector<double>& tau_grid) {
  if (t_grid.size() < 10 || tau_grid.size() < 10)
    throw PreconditionError("fit_bounded_growth: need >= 10 points per grid");
  auto smp = collect_pairs(prop, t_grid, tau_grid);
  const EnvelopeFit full = fit_envelope(smp);

  const auto t_mm = std::minmax_element(t_grid.begin(), t_grid.end());
  const auto u_mm = std::minmax_element(tau_grid.begin(), tau_grid.end());
  const double t_mid = 0.5 * (*t_mm.first + *t_mm.second);
  const double u_mid = 0.5 * (*u_mm.first + *u_mm.second);
  std::vector<PairSample> half;
  for (const auto& s : smp)
    if (s.t <= t_mid && s.tau <= u_mid) half.push_back(s);
  const EnvelopeFit half_fit = half.size() >= 4 ? fit_envelope(half) : full;

  // flat restriction: same gap exponent, eta forced to zero
  double ln_k0_flat = 0.0;
  for (const auto& s : smp)
    ln_k0_flat = std::max(ln_k0_flat, s.ln - full.a * s.gap);

  GrowthFit fit;
  fit.K0 = std::exp(full.ln_k0);
  fit.a = full.a;
  fit.eta = full.eta;
  fit.residual = full.residual;
  fit.a_half_window = half_fit.a;
  fit.K0_flat = std::exp(ln_k0_flat);
  fit.a_flat = full.a;
  fit.flat_excess = ln_k0_flat - full.ln_k0;
  fit.t_grid = t_grid;
  fit.tau_grid = tau_grid;
  // any finite window has some flat envelope, so "uniform" additionally
  // demands that the fit didn't need eta and stays put when the window shrinks
  fit.uniform = fit.eta <= 1e-3 && fit.flat_excess <= 1.0 &&
                std::abs(fit.a_half_window - fit.a) <=
                    0.1 * std::abs(fit.a) + 0.05;
  return fit;
}

nlohmann::json GrowthFit::to_json() const {
  nlohmann::json j;
  j["K0"] = K0;
  j["a"] = a;
  j["eta"] = eta;
  j["uniform"] = uniform;
  j["residual"] = residual;
  j["a_half_window"] = a_half_window;
  j["K0_flat"] = K0_flat;
  j["a_flat"] = a_flat;
  j["flat_excess"] = flat_excess;
  j["t_grid"] = t_grid;
  j["tau_grid"] = tau_grid;
  return j;
}

UniformWindowReport check_uniform_kalman(const GrowthFit& fit,
                                         const std::vector<double>& h_list) {
  UniformWindowReport rep;
  rep.uniform = fit.uniform;
  rep.K0 = fit.K0_flat;
  rep.a = fit.a_flat;
  for (double h : h_list) {
    if (!(h > 0)) throw PreconditionError("check_uniform_kalman: h must be > 0");
    rep.C_h[h] = std::max(1.0 + h, rep.K0 * std::exp(rep.a * h));
  }
  const double c1 = std::max(2.0, rep.K0 * std::exp(rep.a));
  rep.K = c1;
  rep.beta = std::log(c1);
  return rep;
}

nlohmann::json UniformWindowReport::to_json() const {
  nlohmann::json j;
  j["uniform"] = uniform;
  j["K0"] = K0;
  j["a"] = a;
  j["K"] = K;
  j["beta"] = beta;
  auto table = nlohmann::json::array();
  for (const auto& [h, c] : C_h) table.push_back({{"h", h}, {"C", c}});
  j["C_h"] = table;
  return j;
}

double NonuniformKalmanResult::ln_alpha(double gap) const {
  return env::interp_table(gap_table, ln_alpha_table, gap);
}

NonuniformKalmanResult check_nonuniform_kalman(
    const Propagator& prop, const std::vector<double>& t_grid,
    const std::vector<double>& tau_grid, std::vector<double> gap_fences,
    const std::vector<double>& beta_probes) {
  if (t_grid.size() < 10 || tau_grid.size() < 10)
    throw PreconditionError("check_nonuniform_kalman: need >= 10 points per grid");
  return nk_impl(prop, t_grid, tau_grid, {std::move(gap_fences), beta_probes});
}

nlohmann::json NonuniformKalmanResult::to_json() const {
  nlohmann::json j;
  j["holds"] = holds;
  j["nu"] = nu;
  j["gap_fences"] = gap_fences;
  j["nu_by_extension"] = nu_by_extension;
  auto table = nlohmann::json::array();
  for (size_t i = 0; i < gap_table.size(); ++i)
    table.push_back({{"gap", gap_table[i]}, {"ln_alpha", ln_alpha_table[i]}});
  j["alpha_table"] = table;
  auto rows = nlohmann::json::array();
  for (const auto& r : contradiction)
    rows.push_back({{"beta", r.beta},
                    {"statistic", r.statistic},
                    {"allowance", r.allowance},
                    {"margin", r.margin}});
  j["contradiction"] = rows;
  return j;
}

namespace {

// smallest sigma with eig_min(W(t, t+sigma)) > tol: doubling then bisection;
// coarse quadrature is enough since sigma0 feeds grids, not certificates
double find_sigma0(const Propagator& prop, double t, double tol, double cap,
                   double* eig_at_cap) {
  const double quad_tol = 1e-6;
  auto eig_min_at = [&](double sigma) -> double {
    try {
      return gramian_W(prop, t, t + sigma, quad_tol).eig_min;
    } catch (const Error&) {
      return 0.0;  // unresolvable window counts as not controllable yet
    }
  };
  if (!(cap > 0)) return kInf;
  double hi = std::min(tol, cap);
  double lo = 0.0;
  double emin = eig_min_at(hi);
  while (!(emin > tol)) {
    if (hi >= cap) {
      if (eig_at_cap) *eig_at_cap = emin;
      return kInf;
    }
    lo = hi;
    hi = std::min(hi * 2.0, cap);
    emin = eig_min_at(hi);
  }
  for (int i = 0; i < 30 && hi - lo > 0.01 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (eig_min_at(mid) > tol)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

struct MuFit {
  double mu0 = 0, mu1 = 0, mu0_tilde = 0, mu1_tilde = 0;
};

// per-sigma regressions against t; the common exponent is the steepest slope
// over sigma, so a single mu works for the whole table
MuFit fit_mus(const SweepResult& sweep, const std::map<double, double>& sigma0,
              double t_cutoff) {
  MuFit m;
  for (size_t is = 0; is < sweep.sigma_grid.size(); ++is) {
    std::vector<double> ts, w_lo, w_hi, k_lo, k_hi;
    for (size_t it = 0; it < sweep.t_grid.size(); ++it) {
      const SweepPoint& p = sweep.at(it, is);
      if (!p.ok || p.t > t_cutoff) continue;
      const auto s0 = sigma0.find(p.t);
      if (s0 == sigma0.end() || !(p.sigma >= s0->second)) continue;
      ts.push_back(p.t);
      w_lo.push_back(safe_log(p.w_eig_min));
      w_hi.push_back(safe_log(p.w_eig_max));
      k_lo.push_back(safe_log(p.k_eig_min));
      k_hi.push_back(safe_log(p.k_eig_max));
    }
    if (ts.size() < 2) continue;
    m.mu1 = std::max(m.mu1, 0.5 * env::ols_line(ts, w_hi).slope);
    m.mu0 = std::max(m.mu0, -0.5 * env::ols_line(ts, w_lo).slope);
    m.mu1_tilde = std::max(m.mu1_tilde, 0.5 * env::ols_line(ts, k_hi).slope);
    m.mu0_tilde = std::max(m.mu0_tilde, -0.5 * env::ols_line(ts, k_lo).slope);
  }
  return m;
}

}  // namespace

NUCCCertificate certify_controllability(const Propagator& prop,
                                        const std::vector<double>& t_grid_in,
                                        const std::vector<double>& sigma_grid_in,
                                        double tol) {
  if (t_grid_in.empty() || sigma_grid_in.empty())
    throw PreconditionError("certify_controllability: empty grid");
  if (!(tol > 0)) throw PreconditionError("certify_controllability: tol must be > 0");
  NUCCCertificate cert;
  cert.t_grid = t_grid_in;
  cert.sigma_grid = sigma_grid_in;
  std::sort(cert.t_grid.begin(), cert.t_grid.end());
  std::sort(cert.sigma_grid.begin(), cert.sigma_grid.end());
  cert.tol = tol;
  cert.witnesses = nlohmann::json::object();

  cert.sweep = gramian_sweep(prop, cert.t_grid, cert.sigma_grid, tol);

  const Domain& dom = prop.system().domain;
  auto cc_rows = nlohmann::json::array();
  cert.cc = true;
  for (double t : cert.t_grid) {
    const double cap = std::isfinite(dom.t_max)
                           ? dom.t_max - t
                           : 4.0 * cert.sigma_grid.back();
    double eig_at_cap = 0.0;
    const double s0 = find_sigma0(prop, t, tol, cap, &eig_at_cap);
    cert.sigma0[t] = s0;
    if (!std::isfinite(s0)) {
      cert.cc = false;
      cc_rows.push_back(
          {{"t", t}, {"sigma_cap", cap}, {"eig_min_at_cap", eig_at_cap}});
    }
  }
  if (!cert.cc) cert.witnesses["cc_failures"] = cc_rows;

  const double t_max = cert.t_grid.back();
  const MuFit full = fit_mus(cert.sweep, cert.sigma0, t_max);
  cert.mu0 = std::max(0.0, full.mu0);
  cert.mu1 = std::max(0.0, full.mu1);
  cert.mu0_tilde = std::max(0.0, full.mu0_tilde);
  cert.mu1_tilde = std::max(0.0, full.mu1_tilde);
  cert.mu_max = std::max({cert.mu0, cert.mu1, cert.mu0_tilde, cert.mu1_tilde});

  // binding envelope tables at the fitted exponents
  const double nan = std::numeric_limits<double>::quiet_NaN();
  cert.ln_alpha0.assign(cert.sigma_grid.size(), nan);
  cert.ln_alpha1.assign(cert.sigma_grid.size(), nan);
  cert.ln_beta0.assign(cert.sigma_grid.size(), nan);
  cert.ln_beta1.assign(cert.sigma_grid.size(), nan);
  for (size_t is = 0; is < cert.sigma_grid.size(); ++is) {
    double a0 = kInf, a1 = -kInf, b0 = kInf, b1 = -kInf;
    bool any = false;
    for (size_t it = 0; it < cert.t_grid.size(); ++it) {
      const SweepPoint& p = cert.sweep.at(it, is);
      const double s0 = cert.sigma0[p.t];
      if (!p.ok || !std::isfinite(s0) || !(p.sigma >= s0)) continue;
      any = true;
      a0 = std::min(a0, safe_log(p.w_eig_min) + 2.0 * cert.mu0 * p.t);
      a1 = std::max(a1, safe_log(p.w_eig_max) - 2.0 * cert.mu1 * p.t);
      b0 = std::min(b0, safe_log(p.k_eig_min) + 2.0 * cert.mu0_tilde * p.t);
      b1 = std::max(b1, safe_log(p.k_eig_max) - 2.0 * cert.mu1_tilde * p.t);
    }
    if (any) {
      cert.ln_alpha0[is] = a0;
      cert.ln_alpha1[is] = a1;
      cert.ln_beta0[is] = b0;
      cert.ln_beta1[is] = b1;
    }
  }

  // falsifier 1: exponents refitted on nested t-prefixes must not diverge
  const double t_min = cert.t_grid.front();
  std::vector<double> e_mu0, e_mu1, e_mu0t, e_mu1t;
  for (int k = 1; k <= 4; ++k) {
    const double cutoff = t_min + 0.25 * k * (t_max - t_min);
    const MuFit mk = fit_mus(cert.sweep, cert.sigma0, cutoff);
    e_mu0.push_back(std::max(0.0, mk.mu0));
    e_mu1.push_back(std::max(0.0, mk.mu1));
    e_mu0t.push_back(std::max(0.0, mk.mu0_tilde));
    e_mu1t.push_back(std::max(0.0, mk.mu1_tilde));
  }
  const bool mu_div = diverging(e_mu0) || diverging(e_mu1) ||
                      diverging(e_mu0t) || diverging(e_mu1t);
  if (mu_div)
    cert.witnesses["mu_extension"] = {{"mu0", e_mu0},
                                      {"mu1", e_mu1},
                                      {"mu0_tilde", e_mu0t},
                                      {"mu1_tilde", e_mu1t}};

  // falsifier 2: the transition envelope the gramian bounds would imply.
  // Probed on a dense grid over the same span: coarse grids leave the
  // large-gap buckets too thin to fit stable slopes.
  NonuniformKalmanResult nk;
  bool nk_ran = false;
  if (cert.t_grid.size() >= 3 && t_max > t_min) {
    const size_t n_probe = std::max<size_t>(21, cert.t_grid.size());
    std::vector<double> probe(n_probe);
    for (size_t i = 0; i < n_probe; ++i)
      probe[i] = t_min + (t_max - t_min) * double(i) / double(n_probe - 1);
    nk = nk_impl(prop, probe, probe, {});
    nk_ran = true;
    if (!nk.holds) cert.witnesses["transition_envelope"] = nk.to_json();
  }

  if (!cert.cc) {
    cert.verdict = "not_CC";
  } else if (mu_div || (nk_ran && !nk.holds)) {
    cert.verdict = "CC_only";
  } else {
    double s0_min = kInf, s0_max = -kInf;
    for (const auto& [t, s] : cert.sigma0) {
      s0_min = std::min(s0_min, s);
      s0_max = std::max(s0_max, s);
    }
    const bool s0_const = s0_max - s0_min <= std::max(1e-6, 0.05 * s0_max);
    if (cert.mu_max <= 1e-3 && s0_const) {
      cert.verdict = "UCC";
    } else {
      cert.verdict = "NUCC";
      nlohmann::json why;
      why["mu_max"] = cert.mu_max;
      why["sigma0_spread"] = s0_max - s0_min;
      // eigenvalue floor trend at the median window, for the UCC failure story
      const size_t is = cert.sigma_grid.size() / 2;
      auto trend = nlohmann::json::array();
      for (size_t it = 0; it < cert.t_grid.size(); ++it) {
        const SweepPoint& p = cert.sweep.at(it, is);
        if (p.ok) trend.push_back({{"t", p.t}, {"w_eig_min", p.w_eig_min}});
      }
      why["eig_min_trend"] = trend;
      cert.witnesses["ucc"] = why;
    }
  }
  return cert;
}

namespace {

std::vector<std::pair<double, double>> finite_entries(
    const std::vector<double>& sigma, const std::vector<double>& vals) {
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i < sigma.size(); ++i)
    if (std::isfinite(vals[i])) out.emplace_back(sigma[i], vals[i]);
  return out;
}

double interp_pairs(const std::vector<std::pair<double, double>>& tab,
                    double x) {
  if (tab.empty()) throw PreconditionError("certificate envelope table empty");
  std::vector<double> xs, ys;
  xs.reserve(tab.size());
  for (const auto& [a, b] : tab) {
    xs.push_back(a);
    ys.push_back(b);
  }
  return env::interp_table(xs, ys, x);
}

}  // namespace

double NUCCCertificate::ln_alpha0_at(double s) const {
  return interp_pairs(finite_entries(sigma_grid, ln_alpha0), s);
}
double NUCCCertificate::ln_alpha1_at(double s) const {
  return interp_pairs(finite_entries(sigma_grid, ln_alpha1), s);
}
double NUCCCertificate::ln_beta0_at(double s) const {
  return interp_pairs(finite_entries(sigma_grid, ln_beta0), s);
}
double NUCCCertificate::ln_beta1_at(double s) const {
  return interp_pairs(finite_entries(sigma_grid, ln_beta1), s);
}

double NUCCCertificate::sigma0_at(double t) const {
  if (sigma0.empty()) return kInf;
  auto hi = sigma0.lower_bound(t);
  if (hi == sigma0.end()) return std::prev(hi)->second;
  if (hi == sigma0.begin() || hi->first == t) return hi->second;
  auto lo = std::prev(hi);
  if (!std::isfinite(lo->second) || !std::isfinite(hi->second)) return kInf;
  const double w = (t - lo->first) / (hi->first - lo->first);
  return (1.0 - w) * lo->second + w * hi->second;
}

nlohmann::json NUCCCertificate::to_json() const {
  nlohmann::json j;
  j["verdict"] = verdict;
  j["cc"] = cc;
  j["mu0"] = mu0;
  j["mu1"] = mu1;
  j["mu0_tilde"] = mu0_tilde;
  j["mu1_tilde"] = mu1_tilde;
  j["mu_max"] = mu_max;
  j["tol"] = tol;
  j["t_grid"] = t_grid;
  j["sigma_grid"] = sigma_grid;
  auto s0 = nlohmann::json::array();
  for (const auto& [t, s] : sigma0) {
    nlohmann::json row;
    row["t"] = t;
    if (std::isfinite(s))
      row["sigma0"] = s;
    else
      row["sigma0"] = nullptr;
    s0.push_back(row);
  }
  j["sigma0"] = s0;
  auto table = [](const std::vector<double>& v) {
    auto arr = nlohmann::json::array();
    for (double x : v) {
      if (std::isfinite(x))
        arr.push_back(x);
      else
        arr.push_back(nullptr);
    }
    return arr;
  };
  j["ln_alpha0"] = table(ln_alpha0);
  j["ln_alpha1"] = table(ln_alpha1);
  j["ln_beta0"] = table(ln_beta0);
  j["ln_beta1"] = table(ln_beta1);
  j["witnesses"] = witnesses;
  return j;
}

TrifectaReport trifecta_check(const NUCCCertificate& cert,
                              const NonuniformKalmanResult& nk, double slack) {
  if (!(slack >= 1)) throw PreconditionError("trifecta_check: slack must be >= 1");
  TrifectaReport rep;
  rep.slack = slack;
  const double ln_slack = std::log(slack);

  const bool have_gramian_fits = cert.cc;
  const bool have_envelope = nk.holds && !nk.gap_table.empty();
  const double nu = nk.nu;
  const double nu2 = cert.mu0 + cert.mu1 + cert.mu0_tilde + cert.mu1_tilde;

  TrifectaImplication imp_k{"W+envelope=>K", "checked", true, "", {}};
  TrifectaImplication imp_w{"K+envelope=>W", "checked", true, "", {}};
  TrifectaImplication imp_env{"W+K=>envelope", "checked", true, "", {}};

  if (!have_gramian_fits) {
    const char* why = "gramian window fits unavailable (CC failed)";
    for (auto* imp : {&imp_k, &imp_w, &imp_env}) {
      imp->status = "unverifiable";
      imp->note = why;
    }
  } else if (!have_envelope) {
    imp_k.status = imp_w.status = "unverifiable";
    imp_k.note = imp_w.note =
        "transition envelope hypothesis not certified (divergent fit)";
  }

  auto violation = [](const SweepPoint& p, const char* side, double measured,
                      double bound) {
    return nlohmann::json{{"t", p.t},
                          {"sigma", p.sigma},
                          {"side", side},
                          {"measured_ln", measured},
                          {"bound_ln", bound}};
  };

  for (const auto& p : cert.sweep.points) {
    if (!p.ok) continue;
    const double s0 = cert.sigma0_at(p.t);
    const bool beyond = std::isfinite(s0) && p.sigma >= s0;

    if (imp_k.status == "checked" && beyond) {
      const double ln_a = nk.ln_alpha(p.sigma);
      const double lo = -2.0 * nu * p.t - 2.0 * nu * p.sigma - 2.0 * ln_a -
                        2.0 * cert.mu0 * p.t + cert.ln_alpha0_at(p.sigma);
      const double hi = 2.0 * nu * p.t + 2.0 * ln_a + 2.0 * cert.mu1 * p.t +
                        cert.ln_alpha1_at(p.sigma);
      if (safe_log(p.k_eig_min) < lo - ln_slack) {
        imp_k.pass = false;
        imp_k.violations.push_back(violation(p, "lower", safe_log(p.k_eig_min), lo));
      }
      if (safe_log(p.k_eig_max) > hi + ln_slack) {
        imp_k.pass = false;
        imp_k.violations.push_back(violation(p, "upper", safe_log(p.k_eig_max), hi));
      }
    }
    if (imp_w.status == "checked" && beyond) {
      const double ln_a = nk.ln_alpha(p.sigma);
      const double lo = -2.0 * nu * p.t - 2.0 * ln_a -
                        2.0 * cert.mu0_tilde * p.t + cert.ln_beta0_at(p.sigma);
      const double hi = 2.0 * nu * p.t + 2.0 * nu * p.sigma + 2.0 * ln_a +
                        2.0 * cert.mu1_tilde * p.t + cert.ln_beta1_at(p.sigma);
      if (safe_log(p.w_eig_min) < lo - ln_slack) {
        imp_w.pass = false;
        imp_w.violations.push_back(violation(p, "lower", safe_log(p.w_eig_min), lo));
      }
      if (safe_log(p.w_eig_max) > hi + ln_slack) {
        imp_w.pass = false;
        imp_w.violations.push_back(violation(p, "upper", safe_log(p.w_eig_max), hi));
      }
    }
    if (imp_env.status == "checked") {
      // envelope constant for this gap: direct combination past sigma0,
      // the sigma0-shifted combination below it
      double ln_a2;
      bool usable = true;
      if (beyond) {
        ln_a2 = std::max(
            0.5 * (cert.ln_beta1_at(p.sigma) - cert.ln_alpha0_at(p.sigma)),
            0.5 * (cert.ln_alpha1_at(p.sigma) - cert.ln_beta0_at(p.sigma)));
      } else if (std::isfinite(s0) && p.sigma + s0 <= cert.sigma_grid.back()) {
        const double g = p.sigma + s0;
        const double first =
            0.5 * (cert.ln_alpha1_at(s0) + cert.ln_beta1_at(g) -
                   cert.ln_beta0_at(s0) - cert.ln_alpha0_at(g));
        const double second =
            0.5 * (cert.ln_alpha1_at(g) + cert.ln_beta1_at(s0) -
                   cert.ln_beta0_at(g) - cert.ln_alpha0_at(s0));
        ln_a2 = (cert.mu1 + cert.mu0_tilde) * s0 + std::max(first, second);
      } else {
        usable = false;
        ln_a2 = 0;
      }
      if (usable) {
        const double bound_fwd = nu2 * p.t + ln_a2;           // source time t
        const double bound_bwd = nu2 * (p.t + p.sigma) + ln_a2;
        if (p.ln_phi_fwd > bound_fwd + ln_slack) {
          imp_env.pass = false;
          imp_env.violations.push_back(
              violation(p, "forward", p.ln_phi_fwd, bound_fwd));
        }
        if (p.ln_phi_bwd > bound_bwd + ln_slack) {
          imp_env.pass = false;
          imp_env.violations.push_back(
              violation(p, "backward", p.ln_phi_bwd, bound_bwd));
        }
      }
    }
  }

  int unverifiable = 0;
  for (const auto* imp : {&imp_k, &imp_w, &imp_env}) {
    if (imp->status == "unverifiable")
      ++unverifiable;
    else if (!imp->pass)
      rep.consistent = false;
  }
  std::ostringstream note;
  if (unverifiable > 0) {
    note << unverifiable << " of 3 implications unverifiable; ";
    note << "remaining checks are window-level consistency only and cannot "
            "certify the global property (vacuous consistency)";
  } else {
    note << "all hypotheses certified on the window; implications checked "
            "within slack "
         << slack;
  }
  rep.note = note.str();
  rep.implications = {imp_k, imp_w, imp_env};
  return rep;
}

nlohmann::json TrifectaReport::to_json() const {
  nlohmann::json j;
  j["consistent"] = consistent;
  j["slack"] = slack;
  j["note"] = note;
  auto arr = nlohmann::json::array();
  for (const auto& imp : implications)
    arr.push_back({{"name", imp.name},
                   {"status", imp.status},
                   {"pass", imp.pass},
                   {"note", imp.note},
                   {"violations", imp.violations}});
  j["implications"] = arr;
  return j;
}

PlantBoundsReport verify_plant_bounds(const NUCCCertificate& cert,
                                      const Propagator& prop, double slack,
                                      unsigned long seed) {
  if (cert.verdict != "NUCC" && cert.verdict != "UCC")
    throw PreconditionError(
        "verify_plant_bounds: needs a certificate with a NUCC or UCC verdict");
  if (!(slack >= 1)) throw PreconditionError("verify_plant_bounds: slack must be >= 1");
  PlantBoundsReport rep;
  rep.slack = slack;
  const double ln_slack = std::log(slack);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = prop.dim();

  auto add = [&rep](const SweepPoint& p, const char* what, double measured,
                    double bound) {
    rep.ok = false;
    rep.violations.push_back({{"t", p.t},
                              {"sigma", p.sigma},
                              {"check", what},
                              {"measured_ln", measured},
                              {"bound_ln", bound}});
  };

  for (const auto& p : cert.sweep.points) {
    if (!p.ok) continue;
    const double s0 = cert.sigma0_at(p.t);
    if (!std::isfinite(s0) || !(p.sigma >= s0)) continue;
    ++rep.n_checked;
    const double la0 = cert.ln_alpha0_at(p.sigma);
    const double la1 = cert.ln_alpha1_at(p.sigma);
    const double lb0 = cert.ln_beta0_at(p.sigma);
    const double lb1 = cert.ln_beta1_at(p.sigma);

    const double fwd_lo = -(cert.mu0_tilde + cert.mu1) * p.t + 0.5 * (lb0 - la1);
    const double fwd_hi = (cert.mu0 + cert.mu1_tilde) * p.t + 0.5 * (lb1 - la0);
    if (p.ln_phi_fwd < fwd_lo - ln_slack)
      add(p, "forward_lower", p.ln_phi_fwd, fwd_lo);
    if (p.ln_phi_fwd > fwd_hi + ln_slack)
      add(p, "forward_upper", p.ln_phi_fwd, fwd_hi);

    const double bwd_lo = -(cert.mu0 + cert.mu1_tilde) * p.t + 0.5 * (la0 - lb1);
    const double bwd_hi = (cert.mu0_tilde + cert.mu1) * p.t + 0.5 * (la1 - lb0);
    if (p.ln_phi_bwd < bwd_lo - ln_slack)
      add(p, "backward_lower", p.ln_phi_bwd, bwd_lo);
    if (p.ln_phi_bwd > bwd_hi + ln_slack)
      add(p, "backward_upper", p.ln_phi_bwd, bwd_hi);

    // directional lower bounds: |Phi^T eta| for random unit eta
    Eigen::MatrixXd fwd, bwd;
    try {
      fwd = prop.transition(p.t + p.sigma, p.t);
      bwd = prop.transition(p.t, p.t + p.sigma);
    } catch (const Error& e) {
      rep.violations.push_back({{"t", p.t},
                                {"sigma", p.sigma},
                                {"check", "transition_unavailable"},
                                {"note", e.what()}});
      rep.ok = false;
      continue;
    }
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd eta(n);
      for (int i = 0; i < n; ++i) eta(i) = gauss(rng);
      const double nrm = eta.norm();
      if (nrm == 0.0) continue;
      eta /= nrm;
      const double along_bwd = safe_log((bwd.transpose() * eta).norm());
      const double along_fwd = safe_log((fwd.transpose() * eta).norm());
      if (along_bwd < bwd_lo - ln_slack)
        add(p, "corollary_backward", along_bwd, bwd_lo);
      if (along_fwd < fwd_lo - ln_slack)
        add(p, "corollary_forward", along_fwd, fwd_lo);
    }
  }
  return rep;
}

nlohmann::json PlantBoundsReport::to_json() const {
  nlohmann::json j;
  j["ok"] = ok;
  j["slack"] = slack;
  j["n_checked"] = n_checked;
  j["violations"] = violations;
  return j;
}

}  // namespace nucc
