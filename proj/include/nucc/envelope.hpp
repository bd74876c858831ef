#pragma once

#include <vector>

namespace nucc::env {

struct Line {
  double intercept = 0.0;
  double slope = 0.0;
  double at(double x) const { return intercept + slope * x; }
};

// ordinary least squares y ~ intercept + slope * x
Line ols_line(const std::vector<double>& x, const std::vector<double>& y);

// Minimal dominating line: y_i <= line(x_i) for every sample, with the mean
// gap minimized. The optimum lies on an edge of the upper convex hull, so the
// search is exact and O(n log n).
Line upper_line(const std::vector<double>& x, const std::vector<double>& y);

// mirrored: line(x_i) <= y_i, mean gap minimized
Line lower_line(const std::vector<double>& x, const std::vector<double>& y);

// max_i (y_i - line(x_i)); <= 0 certifies the line dominates the samples
double max_above(const Line& line, const std::vector<double>& x,
                 const std::vector<double>& y);

// integral of e^{2 c s} over [0, sigma]; continuous through c = 0
double exp_window_integral(double c, double sigma);

// piecewise-linear table lookup with clamped ends; xs strictly increasing
double interp_table(const std::vector<double>& xs, const std::vector<double>& ys,
                    double x);

}  // namespace nucc::env
