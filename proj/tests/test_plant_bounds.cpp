#include "doctest.h"

#include <memory>
#include <vector>

#include "nucc/catalog.hpp"
#include "nucc/classify.hpp"
#include "nucc/errors.hpp"
#include "nucc/propagator.hpp"
#include "nucc/system.hpp"

using namespace nucc;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

// upper-triangular constant 2x2 with full input: uniformly controllable
SystemDef stable2x2() {
  SystemDef sys;
  sys.name = "stable2x2";
  sys.state_dim = 2;
  sys.input_dim = 2;
  sys.A = std::make_shared<ExprMatrix>(
      2, 2, std::vector<std::string>{"-0.5", "0.2", "0", "-0.4"});
  sys.B = std::make_shared<ExprMatrix>(
      2, 2, std::vector<std::string>{"1", "0", "0", "1"});
  sys.domain = Domain{0.0, 100.0};
  return sys;
}

}  // namespace

TEST_SUITE_BEGIN("plant_bounds");

TEST_CASE("transition bands hold on the nonuniform plant") {
  Propagator prop(make_catalog_system("nucc_bounded_b"));
  const auto cert = certify_controllability(prop, linspace(0.0, 40.0, 9),
                                            {0.5, 1.0, 2.0, 4.0});
  REQUIRE(cert.verdict == "NUCC");
  const auto rep = verify_plant_bounds(cert, prop);
  CHECK(rep.ok);
  CHECK(rep.n_checked == 36);
  CHECK(rep.violations.empty());
}

TEST_CASE("transition bands are tight on the integrator") {
  auto sys = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  Propagator prop(sys);
  const auto cert = certify_controllability(prop, linspace(0.0, 10.0, 6),
                                            {0.5, 1.0, 2.0});
  REQUIRE(cert.verdict == "UCC");
  // W = K = sigma I and Phi = I: every band collapses to 1 <= 1 <= 1
  const auto rep = verify_plant_bounds(cert, prop);
  CHECK(rep.ok);
  CHECK(rep.n_checked == 18);
}

TEST_CASE("transition bands hold for a matrix-valued plant") {
  Propagator prop(stable2x2());
  const auto cert = certify_controllability(prop, linspace(0.0, 12.0, 5),
                                            {0.5, 1.0, 2.0});
  REQUIRE((cert.verdict == "UCC" || cert.verdict == "NUCC"));
  const auto rep = verify_plant_bounds(cert, prop);
  CHECK(rep.ok);
  CHECK(rep.n_checked == 15);
  CHECK(rep.violations.empty());
}

TEST_CASE("plant bounds need a certificate with gramian envelopes") {
  Propagator prop(make_catalog_system("kalman_cc"));
  const auto cert = certify_controllability(prop, linspace(2.0, 12.0, 6),
                                            {0.5, 1.0, 2.0, 3.0});
  REQUIRE(cert.verdict == "CC_only");
  CHECK_THROWS_AS(verify_plant_bounds(cert, prop), PreconditionError);

  Propagator lti(make_catalog_system("lti_scalar"));
  const auto ok_cert =
      certify_controllability(lti, linspace(0.0, 6.0, 5), {0.5, 1.0});
  CHECK_THROWS_AS(verify_plant_bounds(ok_cert, lti, 0.5), PreconditionError);
}

TEST_SUITE_END();
