#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "nucc/quadrature.hpp"

using namespace nucc;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("smooth integrand") {
  const double v =
      quad::integrate_scalar([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sharp peak") {
  // integral of 1/((x-0.3)^2 + 1e-4) over [0,1]; value frozen from the
  // arctangent closed form evaluated independently.
  const double v = quad::integrate_scalar(
      [](double x) { return 1.0 / ((x - 0.3) * (x - 0.3) + 1e-4); }, 0.0, 1.0);
  CHECK(v == doctest::Approx(309.398691512414941).epsilon(1e-9));
}

TEST_CASE("matrix integrand with entrywise closed forms") {
  quad::Integrand f = [](double x, Eigen::MatrixXd& out) {
    out.resize(2, 2);
    out << 1.0, x, x * x, std::exp(x);
  };
  auto est = quad::integrate(f, 0.0, 1.0, 2, 2);
  CHECK(est.converged);
  CHECK(est.n_panels >= 1);
  CHECK(est.value(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.value(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(est.value(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(est.value(1, 1) == doctest::Approx(M_E - 1.0).epsilon(1e-12));
}

TEST_CASE("error estimate is honest on an oscillatory integrand") {
  quad::Options opt;
  opt.rel_tol = 1e-10;
  const double exact = (1.0 - std::cos(100.0)) / 100.0;
  const double v = quad::integrate_scalar(
      [](double x) { return std::sin(100.0 * x); }, 0.0, 1.0, opt);
  CHECK(std::abs(v - exact) <= 1e-9);
}

TEST_CASE("budget exhaustion is reported, not hidden") {
  quad::Options opt;
  opt.max_depth = 3;
  opt.rel_tol = 1e-14;
  opt.abs_tol = 1e-300;
  quad::Integrand f = [](double x, Eigen::MatrixXd& out) {
    out.resize(1, 1);
    out(0, 0) = 1.0 / std::sqrt(x + 1e-12);
  };
  auto est = quad::integrate(f, 0.0, 1.0, 1, 1, opt);
  CHECK_FALSE(est.converged);
  CHECK(est.error > 0.0);
}

TEST_CASE("degenerate interval") {
  const double v =
      quad::integrate_scalar([](double x) { return x * x; }, 2.0, 2.0);
  CHECK(v == 0.0);
}

TEST_SUITE_END();
