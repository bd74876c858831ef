#include <cmath>
#include <sstream>

#include "doctest.h"
#include "nucc/catalog.hpp"
#include "nucc/errors.hpp"
#include "nucc/propagator.hpp"

using namespace nucc;

namespace {

// 2x2 polynomial system used for matrix-valued checks.
SystemDef poly2x2() {
  SystemDef sys;
  sys.name = "poly2x2";
  sys.state_dim = 2;
  sys.input_dim = 2;
  sys.A = std::make_shared<ExprMatrix>(
      2, 2,
      std::vector<std::string>{"0.2 - 0.3*t", "0.5", "-0.4", "-0.1 + 0.2*t^2"});
  sys.B = std::make_shared<ExprMatrix>(
      2, 2, std::vector<std::string>{"1.0", "0.3*t", "-0.2", "0.8"});
  sys.domain = Domain{0.0, 50.0};
  return sys;
}

SystemDef diag_growth(double up, double down, double t_max) {
  SystemDef sys;
  sys.name = "diag";
  sys.state_dim = 2;
  sys.input_dim = 1;
  std::ostringstream u, d;
  u << up;
  d << down;
  sys.A = std::make_shared<ExprMatrix>(
      2, 2, std::vector<std::string>{u.str(), "0", "0", d.str()});
  sys.B = std::make_shared<ExprMatrix>(2, 1, std::vector<std::string>{"0", "0"});
  sys.domain = Domain{0.0, t_max};
  return sys;
}

}  // namespace

TEST_SUITE_BEGIN("propagator");

TEST_CASE("identity at equal times") {
  Propagator prop(poly2x2());
  auto I = prop.transition(1.5, 1.5);
  CHECK((I - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("kalman closed form vs integrator") {
  // ln Phi(t,s) = (s^2 - t^2)/2; frozen spot Phi(2,1) = e^{-3/2}.
  auto sys = make_catalog_system("kalman_cc");

  Propagator analytic(sys);  // Auto prefers the closed form
  CHECK(analytic.transition(2.0, 1.0)(0, 0) ==
        doctest::Approx(2.2313016014842982e-01).epsilon(1e-14));

  PropagatorOptions num;
  num.path = Path::Numeric;
  Propagator numeric(sys, num);
  CHECK(numeric.transition(2.0, 1.0)(0, 0) ==
        doctest::Approx(2.2313016014842982e-01).epsilon(1e-8));
  // reverse direction
  CHECK(numeric.transition(1.0, 2.0)(0, 0) ==
        doctest::Approx(std::exp(1.5)).epsilon(1e-8));
}

TEST_CASE("oscillatory closed form vs integrator") {
  // frozen: Phi(pi, pi/2) = e^{1 - 2 pi} for lambda0=-2, a=-1
  auto sys = make_catalog_system("barreira");
  Propagator analytic(sys);
  PropagatorOptions o;
  o.path = Path::Numeric;
  Propagator numeric(sys, o);
  const double expected = 5.0762356432897471e-03;
  CHECK(analytic.transition(M_PI, M_PI / 2)(0, 0) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK(numeric.transition(M_PI, M_PI / 2)(0, 0) ==
        doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("cocycle and inverse on a matrix system") {
  Propagator prop(poly2x2());
  auto P31 = prop.transition(1.3, 0.3);
  auto P32 = prop.transition(1.3, 0.7);
  auto P21 = prop.transition(0.7, 0.3);
  CHECK((P32 * P21 - P31).cwiseAbs().maxCoeff() < 1e-8);

  auto fwd = prop.transition(1.1, 0.2);
  auto bwd = prop.transition(0.2, 1.1);
  CHECK((fwd * bwd - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-8);
}

TEST_CASE("log norms agree with direct norms when representable") {
  Propagator prop(poly2x2());
  const double direct =
      std::log(Eigen::JacobiSVD<Eigen::MatrixXd>(prop.transition(1.3, 0.3))
                   .singularValues()(0));
  CHECK(prop.log_norm_transition(1.3, 0.3) ==
        doctest::Approx(direct).epsilon(1e-7));

  auto kal = make_catalog_system("kalman_cc");
  Propagator analytic(kal);
  CHECK(analytic.log_norm_transition(5.0, 1.0) == doctest::Approx(-12.0));
  PropagatorOptions o;
  o.path = Path::Numeric;
  Propagator numeric(kal, o);
  CHECK(numeric.log_norm_transition(5.0, 1.0) ==
        doctest::Approx(-12.0).epsilon(1e-9));

  auto lti = make_catalog_system("lti_scalar");
  Propagator flat(lti);
  CHECK(flat.log_norm_transition(3.0, 1.0) == doctest::Approx(-2.0));
}

TEST_CASE("renormalized log norm survives overflow-scale growth") {
  // ln||Phi(100,0)|| = 800 for diag(8,-8); the raw matrix is not
  // representable, the log norm must still come out right.
  Propagator prop(diag_growth(8.0, -8.0, 200.0));
  CHECK(prop.log_norm_transition(100.0, 0.0) ==
        doctest::Approx(800.0).epsilon(1e-7));
  CHECK(prop.log_norm_transition(0.0, 100.0) ==
        doctest::Approx(800.0).epsilon(1e-7));  // inverse norm flips the sign of the small block
  CHECK_THROWS_AS(prop.transition(100.0, 0.0), GrowthOverflowError);
}

TEST_CASE("anchored flows match direct transitions") {
  auto kal = make_catalog_system("kalman_cc");
  PropagatorOptions o;
  o.path = Path::Numeric;
  Propagator prop(kal, o);

  AnchoredFlow from(prop, 1.0, AnchoredFlow::Mode::FromAnchor);
  AnchoredFlow to(prop, 2.0, AnchoredFlow::Mode::ToAnchor);
  Propagator exact(kal);  // analytic reference

  for (double s : {1.5, 2.0, 1.2, 1.9, 1.05}) {
    CHECK(from.at(s)(0, 0) ==
          doctest::Approx(exact.transition(1.0, s)(0, 0)).epsilon(1e-9));
    CHECK(to.at(s)(0, 0) ==
          doctest::Approx(exact.transition(s, 2.0)(0, 0)).epsilon(1e-9));
  }
  // repeated queries hit stored knots and stay identical
  const double again = from.at(1.5)(0, 0);
  CHECK(again == from.at(1.5)(0, 0));
}

TEST_CASE("anchored flow on a matrix system") {
  SystemDef sys = poly2x2();
  Propagator prop(sys);
  AnchoredFlow from(prop, 0.3, AnchoredFlow::Mode::FromAnchor);
  CHECK((from.at(1.3) - prop.transition(0.3, 1.3)).cwiseAbs().maxCoeff() <
        1e-8);
}

TEST_CASE("domain violations are preconditions") {
  auto kal = make_catalog_system("kalman_cc");
  Propagator prop(kal);
  CHECK_THROWS_AS(prop.transition(0.2, 1.0), PreconditionError);
  CHECK_THROWS_AS(prop.log_norm_transition(2.0, 0.0), PreconditionError);
}

TEST_CASE("analytic path demands a closed form") {
  PropagatorOptions o;
  o.path = Path::Analytic;
  CHECK_THROWS_AS(Propagator(poly2x2(), o), PreconditionError);
}

TEST_SUITE_END();
