#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "nucc/errors.hpp"
#include "nucc/ode.hpp"

using Eigen::VectorXd;
using namespace nucc;

namespace {

VectorXd vec1(double v) {
  VectorXd y(1);
  y << v;
  return y;
}

}  // namespace

TEST_SUITE_BEGIN("ode");

TEST_CASE("scalar exponential decay") {
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) { dy = -y; };
  auto res = ode::integrate(f, 0.0, 2.0, vec1(1.0));
  CHECK(res.y(0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-8));
  CHECK(res.t == 2.0);
  CHECK(res.n_accepted > 0);
}

TEST_CASE("backward integration recovers the start") {
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) { dy = -y; };
  auto res = ode::integrate(f, 2.0, 0.0, vec1(std::exp(-2.0)));
  CHECK(res.y(0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("harmonic oscillator stays on the circle") {
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) {
    dy.resize(2);
    dy(0) = y(1);
    dy(1) = -y(0);
  };
  VectorXd y0(2);
  y0 << 1.0, 0.0;
  auto res = ode::integrate(f, 0.0, M_PI, y0);
  CHECK(res.y(0) == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(std::abs(res.y(1)) < 1e-7);
}

TEST_CASE("dense sampling matches the flow") {
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) { dy = y; };
  std::vector<double> ts = {0.25, 0.5, 1.0, 1.75};
  auto vals = ode::sample(f, 0.0, vec1(1.0), ts);
  REQUIRE(vals.size() == ts.size());
  for (size_t i = 0; i < ts.size(); ++i)
    CHECK(vals[i](0) == doctest::Approx(std::exp(ts[i])).epsilon(1e-8));
}

TEST_CASE("dense sampling works backward") {
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) { dy = y; };
  std::vector<double> ts = {-0.5, -1.0};
  auto vals = ode::sample(f, 0.0, vec1(1.0), ts);
  CHECK(vals[0](0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
  CHECK(vals[1](0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("finite-time blow-up raises growth overflow") {
  // y' = y^2 from y(0)=1 explodes at t=1.
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) {
    dy = y.array().square();
  };
  try {
    ode::integrate(f, 0.0, 2.0, vec1(1.0));
    FAIL("expected GrowthOverflowError");
  } catch (const GrowthOverflowError& e) {
    CHECK(e.blow_up_time == doctest::Approx(1.0).epsilon(1e-2));
  }
}

TEST_CASE("watch can halt mid-flight") {
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) { dy = y; };
  ode::StepWatch watch = [](double, const VectorXd& y, bool& halt) {
    if (y(0) > M_E) halt = true;
  };
  auto res = ode::integrate(f, 0.0, 10.0, vec1(1.0), {}, watch);
  CHECK(res.halted);
  CHECK(res.t < 10.0);
  CHECK(res.y(0) >= M_E);
  CHECK(res.y(0) == doctest::Approx(std::exp(res.t)).epsilon(1e-8));
}

TEST_CASE("non-monotone sample targets are rejected") {
  ode::Rhs f = [](double, const VectorXd& y, VectorXd& dy) { dy = y; };
  CHECK_THROWS_AS(ode::sample(f, 0.0, vec1(1.0), {1.0, 0.5}), Error);
}

TEST_SUITE_END();
