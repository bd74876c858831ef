#pragma once

#include <iosfwd>
#include <vector>

#include "nucc/gramian.hpp"

namespace nucc {

// Input samples on an increasing time grid, linearly interpolated between
// samples and clamped outside.
struct ControlSchedule {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> u;

  Eigen::VectorXd value(double time) const;
  // Integral of |u|^2 over the grid span, exact for the interpolant.
  double energy_sq() const;
  // CSV rows t,u1,...,up with a header line.
  void to_csv(std::ostream& os) const;
};

struct MinEnergyResult {
  ControlSchedule u;
  GramianResult W;  // gramian of the steering window
  Eigen::VectorXd x0;
  Eigen::VectorXd x_end;
  double endpoint_norm = 0;
  double energy_sq_ode = 0;      // accumulated along the simulated trajectory
  double energy_sq_gramian = 0;  // x0^T W^{-1} x0
};

// Steers x(t0) = x0 to the origin at tf with the least-energy open-loop
// input, then verifies it by simulation. Throws SingularGramianError when
// the window gramian is numerically singular (not controllable there).
MinEnergyResult min_energy_input(const Propagator& prop, double t0, double tf,
                                 const Eigen::VectorXd& x0, double tol = 1e-9,
                                 int grid_points = 1601);

struct EnergyReport {
  double energy_sq = 0;
  double lower_bound = 0;   // |x0|^2 / eig_max(W)
  double upper_bound = 0;   // |x0|^2 / eig_min(W), +inf when singular
  Eigen::VectorXd x0;
};

// Energy accounting for a schedule against the window gramian it targets.
EnergyReport energy_report(const ControlSchedule& u, const GramianResult& W,
                           const Eigen::VectorXd& x0);

}  // namespace nucc
