#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "nucc/propagator.hpp"

namespace nucc {

struct SweepPoint {
  double t = 0, sigma = 0;
  bool ok = false;
  std::string note;  // failure reason when !ok
  double w_eig_min = 0, w_eig_max = 0;
  double k_eig_min = 0, k_eig_max = 0;
  // spectral log-norms of the window transitions, forward Phi(t+sigma, t)
  // and backward Phi(t, t+sigma); valid whenever ok
  double ln_phi_fwd = 0, ln_phi_bwd = 0;
};

struct SweepResult {
  std::vector<double> t_grid, sigma_grid;
  std::vector<SweepPoint> points;  // row-major: t index major, sigma minor
  const SweepPoint& at(size_t it, size_t is) const {
    return points[it * sigma_grid.size() + is];
  }
};

// Evaluates both gramian windows and the window transitions over the
// (t, t+sigma) grid. Points are independent, so the parallel kernel and the
// serial reference produce bitwise identical results; per-point numerical
// failures are recorded in the point, everything else propagates.
SweepResult gramian_sweep(const Propagator& prop,
                          const std::vector<double>& t_grid,
                          const std::vector<double>& sigma_grid,
                          double tol = 1e-9);
SweepResult gramian_sweep_serial(const Propagator& prop,
                                 const std::vector<double>& t_grid,
                                 const std::vector<double>& sigma_grid,
                                 double tol = 1e-9);

// t, sigma, eig_min W, eig_max W, eig_min K, eig_max K (skips failed points)
void sweep_to_csv(const SweepResult& sweep, std::ostream& os);

}  // namespace nucc
