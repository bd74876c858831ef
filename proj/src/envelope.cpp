#include "nucc/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nucc/errors.hpp"

namespace nucc::env {

namespace {

struct Pt {
  double x, y;
};

// upper convex hull, left to right; colinear points collapse onto the edge
std::vector<Pt> upper_hull(std::vector<Pt> pts) {
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  // for equal x keep only the highest point
  std::vector<Pt> uniq;
  for (const auto& p : pts) {
    if (!uniq.empty() && uniq.back().x == p.x)
      uniq.back().y = std::max(uniq.back().y, p.y);
    else
      uniq.push_back(p);
  }
  std::vector<Pt> hull;
  for (const auto& p : uniq) {
    while (hull.size() >= 2) {
      const Pt& a = hull[hull.size() - 2];
      const Pt& b = hull[hull.size() - 1];
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (cross >= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  return hull;
}

}  // namespace

Line ols_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw PreconditionError("ols_line: mismatched or empty samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return Line{my, 0.0};
  const double m = sxy / sxx;
  return Line{my - m * mx, m};
}

Line upper_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw PreconditionError("upper_line: mismatched or empty samples");
  std::vector<Pt> pts(x.size());
  for (size_t i = 0; i < x.size(); ++i) pts[i] = {x[i], y[i]};
  auto hull = upper_hull(std::move(pts));
  if (hull.size() == 1) return Line{hull[0].y, 0.0};
  const double mx =
      std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  // mean gap = line(mx) - mean(y): minimize line(mx) over hull edges, each of
  // which dominates all samples because the hull is concave
  Line best;
  double best_val = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < hull.size(); ++i) {
    const double m = (hull[i + 1].y - hull[i].y) / (hull[i + 1].x - hull[i].x);
    const double c = hull[i].y - m * hull[i].x;
    const double v = c + m * mx;
    if (v < best_val) {
      best_val = v;
      best = Line{c, m};
    }
  }
  return best;
}

Line lower_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> neg(y.size());
  for (size_t i = 0; i < y.size(); ++i) neg[i] = -y[i];
  Line up = upper_line(x, neg);
  return Line{-up.intercept, -up.slope};
}

double max_above(const Line& line, const std::vector<double>& x,
                 const std::vector<double>& y) {
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, y[i] - line.at(x[i]));
  return worst;
}

double exp_window_integral(double c, double sigma) {
  const double z = 2.0 * c * sigma;
  if (std::abs(z) < 1e-8) return sigma * (1.0 + 0.5 * z + z * z / 6.0);
  return std::expm1(z) / (2.0 * c);
}

double interp_table(const std::vector<double>& xs, const std::vector<double>& ys,
                    double x) {
  if (xs.size() != ys.size() || xs.empty())
    throw PreconditionError("interp_table: mismatched or empty table");
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const size_t i = static_cast<size_t>(it - xs.begin()) - 1;
  const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return (1.0 - w) * ys[i] + w * ys[i + 1];
}

}  // namespace nucc::env
