#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nucc/catalog.hpp"
#include "nucc/errors.hpp"
#include "nucc/min_energy.hpp"
#include "nucc/ode.hpp"

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

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

// composite Simpson on a uniform grid with an odd point count; matches the
// functional ControlSchedule::energy_sq() minimizes, so projections taken
// with these weights are exactly energy-neutral
double simpson_integral(const std::vector<double>& t,
                        const std::vector<double>& v) {
  REQUIRE(t.size() >= 3);
  REQUIRE(t.size() % 2 == 1);
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  double acc = v.front() + v.back();
  for (size_t i = 1; i + 1 < t.size(); ++i)
    acc += (i % 2 == 1 ? 4.0 : 2.0) * v[i];
  return acc * h / 3.0;
}

}  // namespace

TEST_SUITE_BEGIN("min_energy");

TEST_CASE("flat scalar system steers with a constant input") {
  auto sys = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  Propagator prop(sys);
  auto res = min_energy_input(prop, 0.0, 1.0, vec1(1.0));

  for (const auto& u : res.u.u)
    CHECK(u(0) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(res.endpoint_norm <= 1e-9);
  CHECK(res.energy_sq_gramian == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.energy_sq_ode == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.u.energy_sq() == doctest::Approx(1.0).epsilon(1e-9));

  auto rep = energy_report(res.u, res.W, res.x0);
  CHECK(rep.lower_bound == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.upper_bound == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.energy_sq >= rep.lower_bound * (1 - 1e-8));
  CHECK(rep.energy_sq <= rep.upper_bound * (1 + 1e-8));
}

TEST_CASE("kalman window steering") {
  Propagator prop(make_catalog_system("kalman_cc"));
  auto res = min_energy_input(prop, 1.0, 2.0, vec1(1.0));
  CHECK(res.endpoint_norm <= 1e-6);
  // frozen: 1/(1 - e^{-1})
  CHECK(res.energy_sq_gramian ==
        doctest::Approx(1.5819767068693265).epsilon(1e-8));
  CHECK(res.energy_sq_ode ==
        doctest::Approx(res.energy_sq_gramian).epsilon(1e-6));
  auto rep = energy_report(res.u, res.W, res.x0);
  CHECK(rep.energy_sq ==
        doctest::Approx(res.energy_sq_gramian).epsilon(1e-6));
  CHECK(rep.energy_sq >= rep.lower_bound * (1 - 1e-8));
  CHECK(rep.energy_sq <= rep.upper_bound * (1 + 1e-8));
}

TEST_CASE("zero start needs no input") {
  Propagator prop(make_catalog_system("kalman_cc"));
  auto res = min_energy_input(prop, 1.0, 2.0, vec1(0.0));
  for (const auto& u : res.u.u) CHECK(u(0) == 0.0);
  CHECK(res.x_end.norm() == 0.0);
  CHECK(res.energy_sq_ode == 0.0);
  auto rep = energy_report(res.u, res.W, res.x0);
  CHECK(rep.energy_sq == 0.0);
  CHECK(rep.lower_bound == 0.0);
}

TEST_CASE("input-free system is not steerable") {
  Propagator prop(make_catalog_system("barreira"));
  CHECK_THROWS_AS(min_energy_input(prop, 0.0, 1.0, vec1(1.0)),
                  SingularGramianError);
}

TEST_CASE("matrix system steering") {
  Propagator prop(poly2x2());
  Eigen::VectorXd x0(2);
  x0 << 1.0, -0.5;
  auto res = min_energy_input(prop, 0.3, 1.3, x0);
  CHECK(res.endpoint_norm <= 1e-6 * x0.norm());
  CHECK(res.energy_sq_ode ==
        doctest::Approx(res.energy_sq_gramian).epsilon(1e-6));
  auto rep = energy_report(res.u, res.W, res.x0);
  CHECK(rep.energy_sq ==
        doctest::Approx(res.energy_sq_gramian).epsilon(1e-6));
  CHECK(rep.energy_sq >= rep.lower_bound * (1 - 1e-8));
  CHECK(rep.energy_sq <= rep.upper_bound * (1 + 1e-8));
}

TEST_CASE("schedule csv shape") {
  auto sys = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  Propagator prop(sys);
  auto res = min_energy_input(prop, 0.0, 1.0, vec1(1.0), 1e-9, 5);
  std::ostringstream os;
  res.u.to_csv(os);
  const std::string csv = os.str();
  CHECK(csv.substr(0, 5) == "t,u1\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 rows
}

TEST_CASE("projected perturbations cannot beat the optimum") {
  // exact variant on the flat system: zero-mean perturbations keep the
  // endpoint and can only add energy
  auto sys = make_catalog_system(CatalogRef{"lti_scalar", {{"A", 0.0}, {"B", 1.0}}});
  Propagator prop(sys);
  auto res = min_energy_input(prop, 0.0, 1.0, vec1(1.0), 1e-9, 201);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-0.2, 0.2);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> delta(res.u.t.size());
    for (auto& d : delta) d = dist(rng);
    const double mean = simpson_integral(res.u.t, delta) /
                        (res.u.t.back() - res.u.t.front());
    ControlSchedule perturbed = res.u;
    for (size_t i = 0; i < delta.size(); ++i)
      perturbed.u[i](0) += delta[i] - mean;
    CHECK(perturbed.energy_sq() >= res.u.energy_sq() - 1e-8);
  }
}

TEST_CASE("projected perturbations on the kalman window") {
  Propagator prop(make_catalog_system("kalman_cc"));
  auto res = min_energy_input(prop, 1.0, 2.0, vec1(1.0), 1e-9, 401);
  const auto& ts = res.u.t;

  // reachability weight r(s) = Phi(1,s) B(s) on the schedule grid
  std::vector<double> w(ts.size());
  for (size_t i = 0; i < ts.size(); ++i)
    w[i] = prop.transition(1.0, ts[i])(0, 0) * (*prop.system().B)(ts[i])(0, 0);
  std::vector<double> ww(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) ww[i] = w[i] * w[i];

  // smooth perturbations: a few random low-frequency modes, so the grid
  // functionals and the continuous endpoint integral agree to O(h^2)
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> amp(-0.3, 0.3);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> delta(ts.size(), 0.0);
    for (int k = 1; k <= 3; ++k) {
      const double a = amp(rng);
      for (size_t i = 0; i < ts.size(); ++i)
        delta[i] += a * std::sin(k * M_PI * (ts[i] - 1.0));
    }
    // project out the component that moves the endpoint
    std::vector<double> wd(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) wd[i] = w[i] * delta[i];
    const double c = simpson_integral(ts, wd) / simpson_integral(ts, ww);
    ControlSchedule perturbed = res.u;
    for (size_t i = 0; i < ts.size(); ++i)
      perturbed.u[i](0) += delta[i] - c * w[i];

    CHECK(perturbed.energy_sq() >= res.u.energy_sq() - 1e-8);

    // the projected input still parks the state near the origin
    ode::Rhs rhs = [&](double s, const Eigen::VectorXd& y,
                       Eigen::VectorXd& dy) {
      dy.resize(1);
      dy(0) = -s * y(0) + (*prop.system().B)(s)(0, 0) * perturbed.value(s)(0);
    };
    auto sim = ode::integrate(rhs, 1.0, 2.0, Eigen::VectorXd::Ones(1));
    CHECK(std::abs(sim.y(0)) <= 1e-3);  // grid-level projection accuracy
  }
}

TEST_SUITE_END();
