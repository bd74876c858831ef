#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <vector>

#include "nucc/catalog.hpp"
#include "nucc/errors.hpp"
#include "nucc/parallel.hpp"
#include "nucc/propagator.hpp"
#include "nucc/sweep.hpp"

using namespace nucc;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("sweep_parallel");

TEST_CASE("parallel sweep is bitwise identical to the serial reference") {
  Propagator prop(make_catalog_system("nucc_bounded_b"));
  const auto t_grid = linspace(0.0, 20.0, 7);
  const std::vector<double> sigma_grid = {0.5, 2.0};

  const auto par = gramian_sweep(prop, t_grid, sigma_grid);
  const auto ser = gramian_sweep_serial(prop, t_grid, sigma_grid);
  REQUIRE(par.points.size() == ser.points.size());
  for (size_t i = 0; i < par.points.size(); ++i) {
    const auto& a = par.points[i];
    const auto& b = ser.points[i];
    CHECK(a.ok == b.ok);
    CHECK(a.note == b.note);
    CHECK(a.t == b.t);
    CHECK(a.sigma == b.sigma);
    CHECK(a.w_eig_min == b.w_eig_min);
    CHECK(a.w_eig_max == b.w_eig_max);
    CHECK(a.k_eig_min == b.k_eig_min);
    CHECK(a.k_eig_max == b.k_eig_max);
    CHECK(a.ln_phi_fwd == b.ln_phi_fwd);
    CHECK(a.ln_phi_bwd == b.ln_phi_bwd);
  }
}

TEST_CASE("grid violations are preconditions") {
  Propagator prop(make_catalog_system("kalman_cc"));  // domain [1, inf)
  const auto sweep = gramian_sweep(prop, {2.0}, {0.5});
  REQUIRE(sweep.points.size() == 1);
  CHECK(sweep.points.front().ok);

  CHECK_THROWS_AS(gramian_sweep(prop, {0.5}, {1.0}), PreconditionError);
  CHECK_THROWS_AS(gramian_sweep(prop, {2.0}, {-1.0}), PreconditionError);
  CHECK_THROWS_AS(gramian_sweep(prop, {}, {1.0}), PreconditionError);
}

TEST_CASE("thread count honors the environment override") {
  setenv("NUCC_THREADS", "3", 1);
  CHECK(par::thread_count() == 3);
  setenv("NUCC_THREADS", "1", 1);
  CHECK(par::thread_count() == 1);
  unsetenv("NUCC_THREADS");
  CHECK(par::thread_count() >= 1);
}

TEST_CASE("parallel loop propagates the lowest-index failure") {
  std::atomic<int> ran{0};
  try {
    par::parallel_for(8, [&](long i) {
      ++ran;
      if (i == 3) throw PreconditionError("boom at 3");
      if (i == 6) throw PreconditionError("boom at 6");
    });
    FAIL("expected a throw");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("boom at 3") != std::string::npos);
  }
  CHECK(ran.load() == 8);
}

TEST_SUITE_END();
