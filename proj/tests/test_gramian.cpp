#include <cmath>

#include "doctest.h"
#include "nucc/catalog.hpp"
#include "nucc/errors.hpp"
#include "nucc/gramian.hpp"
#include "oracles.hpp"

using namespace nucc;

namespace {

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

// closed form for the kalman_cc window gramian
double kalman_W(double t, double sigma) {
  return std::exp(2.0 * (sigma - 1.0) * t + (sigma - 1.0) * (sigma - 1.0)) -
         std::exp(-2.0 * t + 1.0);
}

}  // namespace

TEST_SUITE_BEGIN("gramian");

TEST_CASE("flat scalar system integrates to the window length") {
  auto sys = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  Propagator prop(sys);
  for (double sigma : {0.5, 1.0, 2.5}) {
    auto W = gramian_W(prop, 0.0, sigma);
    auto K = gramian_K(prop, 0.0, sigma);
    CHECK(W.matrix(0, 0) == doctest::Approx(sigma).epsilon(1e-12));
    CHECK(K.matrix(0, 0) == doctest::Approx(sigma).epsilon(1e-12));
    W.require_valid();
    K.require_valid();
  }
  CHECK(check_gramian_identity(prop, 0.0, 2.0) < 1e-12);
}

TEST_CASE("kalman window gramian matches its closed form") {
  Propagator prop(make_catalog_system("kalman_cc"));
  // frozen: W(1,2) = 1 - e^{-1}
  auto W12 = gramian_W(prop, 1.0, 2.0);
  CHECK(W12.matrix(0, 0) ==
        doctest::Approx(6.3212055882855767e-01).epsilon(1e-9));
  CHECK(W12.quadrature_error_estimate < 1e-6);
  for (double t : {1.0, 2.0})
    for (double sigma : {0.5, 1.0, 2.0}) {
      auto W = gramian_W(prop, t, t + sigma);
      CHECK(W.matrix(0, 0) ==
            doctest::Approx(kalman_W(t, sigma)).epsilon(1e-8));
    }
}

TEST_CASE("kalman K composes the closed forms") {
  Propagator prop(make_catalog_system("kalman_cc"));
  auto K = gramian_K(prop, 1.0, 2.0);
  const double expected = std::exp(-3.0) * (1.0 - std::exp(-1.0));
  CHECK(K.matrix(0, 0) == doctest::Approx(expected).epsilon(1e-8));
  CHECK(check_gramian_identity(prop, 1.0, 2.0) < 1e-8);
}

TEST_CASE("matrix system against the fixed-grid oracle") {
  Propagator prop(poly2x2());
  auto W = gramian_W(prop, 0.3, 1.3);
  W.require_valid();

  // frozen from an independent composite-Simpson evaluation
  Eigen::MatrixXd expected(2, 2);
  expected << 1.02240121962033, 0.03935077840932,
              0.03935077840932, 0.71450441532859;
  CHECK((W.matrix - expected).cwiseAbs().maxCoeff() < 1e-9);

  Eigen::MatrixXd simpson = oracle::simpson_gramian_W(prop, 0.3, 1.3, 2000);
  CHECK((W.matrix - simpson).cwiseAbs().maxCoeff() < 1e-8);

  auto K = gramian_K(prop, 0.3, 1.3);
  Eigen::MatrixXd simpson_k = oracle::simpson_gramian_K(prop, 0.3, 1.3, 2000);
  CHECK((K.matrix - simpson_k).cwiseAbs().maxCoeff() < 1e-8);

  CHECK(check_gramian_identity(prop, 0.3, 1.3) < 1e-6);
}

TEST_CASE("windows only grow") {
  Propagator kal(make_catalog_system("kalman_cc"));
  auto Wa = gramian_W(kal, 1.0, 2.0);
  auto Wb = gramian_W(kal, 1.0, 3.0);
  CHECK(Wb.matrix(0, 0) - Wa.matrix(0, 0) >= -1e-12);

  Propagator poly(poly2x2());
  auto Pa = gramian_W(poly, 0.3, 1.0);
  auto Pb = gramian_W(poly, 0.3, 1.3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Pa.matrix - Pb.matrix);
  CHECK(es.eigenvalues().maxCoeff() <= 1e-10);
}

TEST_CASE("input-free system has a zero gramian") {
  Propagator prop(make_catalog_system("barreira"));
  auto W = gramian_W(prop, 0.0, 2.0);
  W.require_valid();
  CHECK(W.matrix.norm() == 0.0);
  CHECK(W.eig_max == 0.0);
}

TEST_CASE("budget exhaustion raises an accuracy error") {
  // non-integrable kernel: B blows up inside the window
  SystemDef sys;
  sys.name = "bad";
  sys.A = std::make_shared<ExprMatrix>(1, 1, std::vector<std::string>{"0"});
  sys.B = std::make_shared<ExprMatrix>(
      1, 1, std::vector<std::string>{"1/(t - 0.3183098861837907)"});
  sys.domain = Domain{0.0, 1.0};
  Propagator prop(sys);
  try {
    gramian_W(prop, 0.0, 1.0);
    FAIL("expected AccuracyError");
  } catch (const AccuracyError& e) {
    CHECK(e.achieved > 0.0);
  }
}

TEST_CASE("preconditions") {
  Propagator prop(make_catalog_system("kalman_cc"));
  CHECK_THROWS_AS(gramian_W(prop, 2.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(gramian_W(prop, 0.2, 2.0), PreconditionError);
}

TEST_CASE("damped window gramian") {
  auto sys = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  Propagator prop(sys);
  // frozen: (1 - e^{-2 l s})/(2 l) at l = 0.7, s = 1.3
  auto S0 = shifted_gramian(prop, 0.7, 0.0, 1.3);
  CHECK(S0.matrix(0, 0) ==
        doctest::Approx(5.9855303504722801e-01).epsilon(1e-10));
  // independent of the window start for a frozen coefficient system
  auto S2 = shifted_gramian(prop, 0.7, 2.0, 1.3);
  CHECK(std::abs(S2.matrix(0, 0) - S0.matrix(0, 0)) < 1e-10);

  // vanishing damping approaches the plain gramian
  Propagator kal(make_catalog_system("kalman_cc"));
  auto Wp = gramian_W(kal, 1.0, 2.0);
  auto Ws = shifted_gramian(kal, 1e-8, 1.0, 1.0);
  CHECK(Ws.matrix(0, 0) ==
        doctest::Approx(Wp.matrix(0, 0)).epsilon(1e-6));

  CHECK_THROWS_AS(shifted_gramian(prop, 0.0, 0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(shifted_gramian(prop, -1.0, 0.0, 1.0), PreconditionError);
}

TEST_CASE("state-energy integral") {
  auto sys = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  Propagator prop(sys);
  // l = 0: integrand is the identity, integral is the window length
  auto Y0 = y_integral(prop, 0.0, 2.0, 1.3);
  CHECK(Y0.matrix(0, 0) == doctest::Approx(1.3).epsilon(1e-12));
  // frozen: (e^{2 s} - 1)/2 at l = 1, s = 1.3
  auto Y1 = y_integral(prop, 1.0, 0.0, 1.3);
  CHECK(Y1.matrix(0, 0) ==
        doctest::Approx(6.2318690175008458e+00).epsilon(1e-10));
  CHECK_THROWS_AS(y_integral(prop, -0.1, 0.0, 1.0), PreconditionError);

  // matrix case against the fixed-grid oracle
  Propagator poly(poly2x2());
  auto Y = y_integral(poly, 0.5, 0.3, 0.7);
  Eigen::MatrixXd simpson = oracle::simpson_matrix(
      [&](double s) -> Eigen::MatrixXd {
        Eigen::MatrixXd Z = poly.transition(s, 0.3);
        return std::exp(2.0 * 0.5 * (s - 0.3)) * (Z.transpose() * Z);
      },
      0.3, 1.0, 2000);
  CHECK((Y.matrix - simpson).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_SUITE_END();
