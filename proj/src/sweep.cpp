#include "nucc/sweep.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nucc/errors.hpp"
#include "nucc/gramian.hpp"
#include "nucc/parallel.hpp"

namespace nucc {

namespace {

void check_grids(const Propagator& prop, const std::vector<double>& t_grid,
                 const std::vector<double>& sigma_grid) {
  if (t_grid.empty() || sigma_grid.empty())
    throw PreconditionError("gramian_sweep: empty grid");
  for (double s : sigma_grid)
    if (!(s > 0)) throw PreconditionError("gramian_sweep: sigma must be > 0");
  const Domain& dom = prop.system().domain;
  for (double t : t_grid) {
    dom.require(t, "gramian_sweep");
    dom.require(t + sigma_grid.back(), "gramian_sweep window end");
  }
}

void eval_point(const Propagator& prop, double tol, SweepPoint& p) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    auto W = gramian_W(prop, p.t, p.t + p.sigma, tol);
    auto K = gramian_K(prop, p.t, p.t + p.sigma, tol);
    p.w_eig_min = W.eig_min;
    p.w_eig_max = W.eig_max;
    p.k_eig_min = K.eig_min;
    p.k_eig_max = K.eig_max;
    p.ln_phi_fwd = prop.log_norm_transition(p.t + p.sigma, p.t);
    p.ln_phi_bwd = prop.log_norm_transition(p.t, p.t + p.sigma);
    p.ok = true;
  } catch (const Error& e) {
    p.ok = false;
    p.note = e.what();
    p.w_eig_min = p.w_eig_max = p.k_eig_min = p.k_eig_max = nan;
    p.ln_phi_fwd = p.ln_phi_bwd = nan;
  }
}

SweepResult run(const Propagator& prop, const std::vector<double>& t_grid,
                const std::vector<double>& sigma_grid, double tol,
                bool parallel) {
  check_grids(prop, t_grid, sigma_grid);
  SweepResult res;
  res.t_grid = t_grid;
  res.sigma_grid = sigma_grid;
  const long n = static_cast<long>(t_grid.size() * sigma_grid.size());
  res.points.resize(static_cast<size_t>(n));
  const long ns = static_cast<long>(sigma_grid.size());
  auto work = [&](long i) {
    SweepPoint& p = res.points[static_cast<size_t>(i)];
    p.t = t_grid[static_cast<size_t>(i / ns)];
    p.sigma = sigma_grid[static_cast<size_t>(i % ns)];
    eval_point(prop, tol, p);
  };
  if (parallel)
    par::parallel_for(n, work);
  else
    for (long i = 0; i < n; ++i) work(i);
  return res;
}

}  // namespace

SweepResult gramian_sweep(const Propagator& prop,
                          const std::vector<double>& t_grid,
                          const std::vector<double>& sigma_grid, double tol) {
  return run(prop, t_grid, sigma_grid, tol, true);
}

SweepResult gramian_sweep_serial(const Propagator& prop,
                                 const std::vector<double>& t_grid,
                                 const std::vector<double>& sigma_grid,
                                 double tol) {
  return run(prop, t_grid, sigma_grid, tol, false);
}

void sweep_to_csv(const SweepResult& sweep, std::ostream& os) {
  os << "t,sigma,w_eig_min,w_eig_max,k_eig_min,k_eig_max\n";
  os << std::setprecision(17);
  for (const auto& p : sweep.points) {
    if (!p.ok) continue;
    os << p.t << "," << p.sigma << "," << p.w_eig_min << "," << p.w_eig_max
       << "," << p.k_eig_min << "," << p.k_eig_max << "\n";
  }
}

}  // namespace nucc
