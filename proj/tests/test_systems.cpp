#include <cmath>

#include "doctest.h"
#include "nucc/catalog.hpp"
#include "nucc/errors.hpp"
#include "nucc/system.hpp"

using namespace nucc;

TEST_SUITE_BEGIN("systems");

TEST_CASE("catalog lists four entries") {
  const auto& entries = catalog_entries();
  REQUIRE(entries.size() == 4);
  CHECK(entries[0].id == "kalman_cc");
  CHECK(entries[1].id == "barreira");
  CHECK(entries[2].id == "nucc_bounded_b");
  CHECK(entries[3].id == "lti_scalar");
  for (const auto& e : entries) {
    auto sys = make_catalog_system(e.id);
    CHECK(sys.name == e.id);
    CHECK(sys.state_dim == 1);
    CHECK(sys.input_dim == 1);
    CHECK(static_cast<bool>(sys.analytic_log_phi));
  }
}

TEST_CASE("evaluate spots") {
  auto lti = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  auto [a0, b0] = evaluate(lti, 3.0);
  CHECK(a0(0, 0) == 0.0);
  CHECK(b0(0, 0) == 1.0);

  auto kal = make_catalog_system("kalman_cc");
  auto [a1, b1] = evaluate(kal, 2.0);
  CHECK(a1(0, 0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(b1(0, 0) ==
        doctest::Approx(std::sqrt(2.0) * std::exp(-1.5)).epsilon(1e-15));

  auto bar = make_catalog_system("barreira");
  auto [a2, b2] = evaluate(bar, 0.0);
  CHECK(a2(0, 0) == -2.0);  // the oscillatory term vanishes at t = 0
  CHECK(b2(0, 0) == 0.0);

  auto bb = make_catalog_system("nucc_bounded_b");
  auto [a3, b3] = evaluate(bb, 17.3);
  CHECK(b3(0, 0) == 1.0);  // defaults collapse the band to b == 1
  CHECK(a3(0, 0) ==
        doctest::Approx(-0.2 - 0.1 * 17.3 * std::sin(17.3)).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_catalog_system("nope"), SchemaError);
  CHECK_THROWS_AS(make_catalog_system(CatalogRef{"barreira", {{"zeta", 1.0}}}),
                  SchemaError);
  // needs lambda0 < a < 0
  CHECK_THROWS_AS(
      make_catalog_system(CatalogRef{"barreira", {{"lambda0", -1.0}, {"a", -2.0}}}),
      SchemaError);
  CHECK_THROWS_AS(
      make_catalog_system(CatalogRef{"barreira", {{"a", 0.1}}}),
      SchemaError);
  CHECK_THROWS_AS(
      make_catalog_system(CatalogRef{"nucc_bounded_b", {{"b0", 2.0}, {"b1", 1.0}}}),
      SchemaError);
  CHECK_THROWS_AS(
      make_catalog_system(CatalogRef{"nucc_bounded_b", {{"beta0", -0.5}}}),
      SchemaError);
}

TEST_CASE("domain checks") {
  auto kal = make_catalog_system("kalman_cc");
  CHECK(kal.domain.t_min == 1.0);
  CHECK_THROWS_AS(evaluate(kal, 0.5), PreconditionError);
  CHECK_NOTHROW(evaluate(kal, 1.0));
  CHECK_NOTHROW(evaluate(kal, 1e6));
}

TEST_CASE("sampled matrices interpolate linearly and clamp") {
  std::vector<Eigen::MatrixXd> samples;
  for (double v : {0.0, 2.0, 1.0})
    samples.push_back(Eigen::MatrixXd::Constant(1, 1, v));
  SampledMatrix m(0.0, 1.0, samples);
  CHECK(m(0.5)(0, 0) == 1.0);
  CHECK(m(1.0)(0, 0) == 2.0);
  CHECK(m(1.5)(0, 0) == 1.5);
  CHECK(m(-3.0)(0, 0) == 0.0);
  CHECK(m(9.0)(0, 0) == 1.0);

  CHECK_THROWS_AS(SampledMatrix(0.0, 0.0, samples), SchemaError);
  samples.resize(1);
  CHECK_THROWS_AS(SampledMatrix(0.0, 1.0, samples), SchemaError);
}

TEST_CASE("expression system json round trip") {
  SystemDef sys;
  sys.name = "poly2x2";
  sys.state_dim = 2;
  sys.input_dim = 2;
  sys.A = std::make_shared<ExprMatrix>(
      2, 2,
      std::vector<std::string>{"0.2 - 0.3*t", "0.5", "-0.4", "-0.1 + 0.2*t^2"});
  sys.B = std::make_shared<ExprMatrix>(
      2, 2, std::vector<std::string>{"1.0", "0.3*t", "-0.2", "0.8"});
  sys.domain = Domain{0.0, 10.0};
  sys.validate();

  auto j = sys.to_json();
  auto back = SystemDef::from_json(j);
  for (double t : {0.0, 0.7, 3.14}) {
    CHECK(((*back.A)(t) - (*sys.A)(t)).norm() == 0.0);
    CHECK(((*back.B)(t) - (*sys.B)(t)).norm() == 0.0);
  }
  CHECK(back.domain.t_max == 10.0);
}

TEST_CASE("catalog json round trip goes through the catalog") {
  auto kal = make_catalog_system("kalman_cc");
  auto back = SystemDef::from_json(kal.to_json());
  CHECK(back.name == "kalman_cc");
  CHECK(static_cast<bool>(back.analytic_log_phi));
  CHECK((*back.B)(2.0)(0, 0) == (*kal.B)(2.0)(0, 0));
  CHECK(!std::isfinite(back.domain.t_max));
}

TEST_CASE("malformed specs are schema errors") {
  CHECK_THROWS_AS(SystemDef::from_json(nlohmann::json::array()), SchemaError);
  nlohmann::json j;
  j["state_dim"] = 1;
  j["input_dim"] = 1;
  j["a_spec"] = {{"kind", "expr"}, {"entries", {{"t +"}}}};
  j["b_spec"] = {{"kind", "expr"}, {"entries", {{"1"}}}};
  CHECK_THROWS_AS(SystemDef::from_json(j), SchemaError);
  j["a_spec"] = {{"kind", "mystery"}};
  CHECK_THROWS_AS(SystemDef::from_json(j), SchemaError);
  // dimension mismatch between declared shape and entries
  j["a_spec"] = {{"kind", "expr"}, {"entries", {{"1", "0"}, {"0", "1"}}}};
  CHECK_THROWS_AS(SystemDef::from_json(j), SchemaError);
}

TEST_SUITE_END();
