#include <catch2/catch_amalgamated.hpp>

#include "nlcf/perimeter.hpp"
#include "oracles.hpp"

using namespace nlcf;
using Catch::Approx;

TEST_CASE("localized perimeter of the unit ball vs brute force") {
  auto k = Kernel::fractional(0.5);
  auto res = per_local(shapes::ball({0, 0}, 1.0), k, 2.0, 5e-3);
  double oracle = oracles::per_local_unit_ball_oracle(k, 0.5, 512);
  CHECK(std::abs(res.value - oracle) / oracle < 0.01);
}

TEST_CASE("full plane has zero localized perimeter") {
  auto k = Kernel::fractional(0.5);
  auto res = per_local(shapes::plane(), k, 2.0);
  CHECK(res.value == 0.0);
}

TEST_CASE("localization monotone in R") {
  auto k = Kernel::fractional(0.5);
  auto H = shapes::halfplane({0, 1}, 0.0);
  auto p1 = per_local(H, k, 1.0, 1e-2);
  auto p2 = per_local(H, k, 2.0, 1e-2);
  CHECK(p1.value > 0.0);
  CHECK(p1.value <= p2.value + p1.error + p2.error);
}

TEST_CASE("per_diff_cross: negativity, bound, limits") {
  auto k = Kernel::fractional(0.5);
  auto rep = per_diff_cross(k, 0.5, 2.0);
  CHECK(rep.diff < 0.0);
  CHECK(rep.diff + rep.quadrature_error < 0.0);
  // the W_r inequality
  for (double r : {0.25, 0.5, 1.0}) {
    if (!(2.0 > std::sqrt(2.0) * r)) continue;
    auto rr = per_diff_cross(k, r, 2.0);
    CHECK(rr.diff <= rr.bound + rr.quadrature_error + rr.bound_error);
    CHECK(rr.bound < 0.0);
  }
  // r -> 0: vanishing difference
  auto tiny = per_diff_cross(k, 0.01, 2.0);
  CHECK(std::abs(tiny.diff) < 5e-3);
  // precondition R > sqrt(2) r
  CHECK_THROWS_AS(per_diff_cross(k, 1.5, 2.0), error);
}

TEST_CASE("per_diff_cross frame invariance") {
  auto k = Kernel::fractional(0.5);
  auto a = per_diff_cross(k, 0.5, 2.0, 5e-3, false);
  auto b = per_diff_cross(k, 0.5, 2.0, 5e-3, true);
  CHECK(std::abs(a.diff - b.diff) <=
        a.quadrature_error + b.quadrature_error + 0.02 * std::abs(a.diff));
}

TEST_CASE("delta regularization ladder approaches the full kernel") {
  auto k = Kernel::fractional(0.5);
  auto full = per_diff_cross(k, 0.5, 2.0);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double d : {0.1, 0.05, 0.025}) {
    auto kd = delta_regularize(k, d);
    CHECK(tail_mass(kd, 1.0) == Approx(tail_mass(k, 1.0)));
    auto rep = per_diff_cross(kd, 0.5, 2.0);
    double gap = std::abs(rep.diff - full.diff);
    CHECK(gap <= prev_gap + full.quadrature_error + rep.quadrature_error);
    prev_gap = gap;
  }
}

TEST_CASE("nonminimality witness") {
  auto k = Kernel::fractional(0.5);
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);
  auto w = find_nonminimality_witness(k, 2.0, grid, 1e-2);
  REQUIRE(w.has_value());
  CHECK(w->margin > 0.0);
  // weak kernels admit a witness too
  auto weak = Kernel::piecewise_power(1.0, 3.0);
  auto ww = find_nonminimality_witness(weak, 2.0, {0.3, 0.6}, 1e-2);
  CHECK(ww.has_value());
  // the zero kernel has none
  auto zero = Kernel::table({1.0, 2.0}, {0.0, 0.0});
  CHECK_FALSE(find_nonminimality_witness(zero, 2.0, {0.3}).has_value());
}
