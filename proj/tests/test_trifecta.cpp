#include "doctest.h"

#include <string>
#include <vector>

#include "nucc/catalog.hpp"
#include "nucc/classify.hpp"
#include "nucc/errors.hpp"
#include "nucc/propagator.hpp"

using namespace nucc;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

const TrifectaImplication& find_imp(const TrifectaReport& rep,
                                    const std::string& name) {
  for (const auto& imp : rep.implications)
    if (imp.name == name) return imp;
  REQUIRE(false);
  return rep.implications.front();
}

}  // namespace

TEST_SUITE_BEGIN("trifecta");

TEST_CASE("all three window properties cross-check on the nonuniform plant") {
  Propagator prop(make_catalog_system("nucc_bounded_b"));
  const auto cert = certify_controllability(prop, linspace(0.0, 40.0, 9),
                                            {0.5, 1.0, 2.0, 4.0});
  REQUIRE(cert.verdict == "NUCC");
  const auto nk = check_nonuniform_kalman(prop, linspace(0.0, 40.0, 21),
                                          linspace(0.0, 40.0, 21));
  REQUIRE(nk.holds);

  const auto rep = trifecta_check(cert, nk);
  CHECK(rep.consistent);
  REQUIRE(rep.implications.size() == 3);
  for (const auto& imp : rep.implications) {
    CHECK(imp.status == "checked");
    CHECK(imp.pass);
    CHECK(imp.violations.empty());
  }
  CHECK(rep.note.find("all hypotheses certified") != std::string::npos);
}

TEST_CASE("uniform plant cross-checks with tight margins") {
  Propagator prop(make_catalog_system("lti_scalar"));  // A=-1
  const auto cert =
      certify_controllability(prop, linspace(0.0, 6.0, 5), {0.5, 1.0, 2.0});
  REQUIRE(cert.verdict == "UCC");
  const auto nk = check_nonuniform_kalman(prop, linspace(0.0, 6.0, 13),
                                          linspace(0.0, 6.0, 13));
  REQUIRE(nk.holds);
  CHECK(nk.nu == 0.0);

  // for A=-1 the K window equals e^{-2 sigma} W, and the derived bounds meet
  // the measured values with zero margin; the slack absorbs only fit noise
  const auto rep = trifecta_check(cert, nk);
  CHECK(rep.consistent);
  for (const auto& imp : rep.implications) {
    CHECK(imp.status == "checked");
    CHECK(imp.pass);
  }
}

TEST_CASE("window-growth plant leaves two implications unverifiable") {
  Propagator prop(make_catalog_system("kalman_cc"));
  const auto cert = certify_controllability(prop, linspace(2.0, 16.0, 8),
                                            {0.25, 0.5, 1.0, 2.0, 3.0});
  REQUIRE(cert.verdict == "CC_only");
  const auto nk = check_nonuniform_kalman(
      prop, linspace(1.0, 22.5, 87), linspace(1.0, 22.5, 87),
      {4.0, 8.0, 12.0, 16.0});
  REQUIRE_FALSE(nk.holds);

  const auto rep = trifecta_check(cert, nk);
  const auto& imp_k = find_imp(rep, "W+envelope=>K");
  const auto& imp_w = find_imp(rep, "K+envelope=>W");
  const auto& imp_env = find_imp(rep, "W+K=>envelope");
  CHECK(imp_k.status == "unverifiable");
  CHECK(imp_w.status == "unverifiable");
  // the gramian fits alone stay internally consistent: the identity
  // K = Phi W Phi^T makes the window data self-consistent even though the
  // envelope hypothesis fails, hence the vacuous-consistency warning
  CHECK(imp_env.status == "checked");
  CHECK(imp_env.pass);
  CHECK(rep.consistent);
  CHECK(rep.note.find("2 of 3") != std::string::npos);
  CHECK(rep.note.find("vacuous") != std::string::npos);

  // the sigma grid dips below sigma0 at large t, so the shifted-window
  // combination constant was exercised, not just the direct one
  bool below = false;
  for (const auto& p : cert.sweep.points)
    if (p.ok && p.sigma < cert.sigma0_at(p.t)) below = true;
  CHECK(below);
}

TEST_CASE("trifecta preconditions") {
  Propagator prop(make_catalog_system("lti_scalar"));
  const auto cert =
      certify_controllability(prop, linspace(0.0, 6.0, 5), {0.5, 1.0});
  const auto nk = check_nonuniform_kalman(prop, linspace(0.0, 6.0, 13),
                                          linspace(0.0, 6.0, 13));
  CHECK_THROWS_AS(trifecta_check(cert, nk, 0.5), PreconditionError);
}

TEST_SUITE_END();
