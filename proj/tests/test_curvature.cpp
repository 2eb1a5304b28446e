#include <catch2/catch_amalgamated.hpp>

#include "nlcf/curvature.hpp"
#include "nlcf/flow.hpp"
#include "oracles.hpp"

using namespace nlcf;
using Catch::Approx;

TEST_CASE("halfplane is flat for any kernel") {
  for (auto k : {Kernel::fractional(0.5), Kernel::piecewise_power(1.0, 3.0)}) {
    auto H = shapes::halfplane({0, 1}, 0.3);
    auto est = curvature_pv(H, {0.7, 0.3}, k, {1e-8, 1e-10});
    CHECK(std::abs(est.value) <= est.bar() + 1e-14);
    CHECK(std::abs(est.value) < 1e-12);
  }
}

TEST_CASE("cross flatness at non-corner points") {
  auto k = Kernel::fractional(0.5);
  auto C = shapes::cross_axis();
  double budget = 1e-3 * 2.0 * psi(k, 1.0);
  for (double a : {0.25, 0.7, 1.3, 2.6}) {
    for (Vec2 p : {Vec2{a, a}, Vec2{-a, a}, Vec2{a, -a}}) {
      auto est = curvature_pv(C, p, k, {1e-6, 0.25 * budget});
      CHECK(std::abs(est.value) <= est.bar());
      CHECK(est.bar() <= budget);
    }
  }
  // the center evaluates to exactly zero by the declared odd symmetry
  auto center = curvature_pv(C, {0, 0}, k);
  CHECK(center.value == 0.0);
  CHECK(center.bar() == 0.0);
}

TEST_CASE("ball curvature: generic evaluator vs specialized vs oracle") {
  auto k = Kernel::fractional(0.5);
  auto B = shapes::ball({0, 0}, 1.0);
  auto est = curvature_pv(B, {1, 0}, k, {1e-6, 1e-4});
  double spec = ball_curvature(k, 1.0);
  CHECK(std::abs(est.value - spec) <= est.bar() + 1e-9 * spec);
  double oracle = oracles::ball_curvature_oracle(k, 1.0, 0.5, 4096);
  CHECK(std::abs(est.value - oracle) / oracle < 1e-4);
}

TEST_CASE("perturbed cross top edge dominates -2 Psi(r)") {
  auto k = Kernel::fractional(0.5);
  for (double r : {0.25, 0.5, 1.0}) {
    auto Cr = shapes::perturbed_cross(r);
    auto est = curvature_pv(Cr, {0, r}, k, {1e-6, 1e-6});
    CHECK(est.value <= -2.0 * psi(k, r) + est.bar());
    auto est2 = curvature_pv(Cr, {0.5 * r, r}, k, {1e-6, 1e-6});
    CHECK(est2.value <= -2.0 * psi(k, r) + est2.bar());
  }
}

TEST_CASE("rotational invariance of the ball profile") {
  auto k = Kernel::fractional(0.5);
  auto B = shapes::ball({0, 0}, 1.0);
  auto samples = boundary_sample(B, 2.0 * pi / 12.0);
  auto entries = curvature_profile(B, k, samples, {1e-6, 1e-5});
  REQUIRE(entries.size() >= 12);
  double ref = ball_curvature(k, 1.0);
  for (const auto& e : entries) {
    REQUIRE(e.estimate.has_value());
    CHECK(std::abs(e.estimate->value - ref) <= 2.0 * e.estimate->bar() + 1e-8);
  }
}

TEST_CASE("angular samples are skipped with a reason") {
  auto k = Kernel::fractional(0.5);
  auto O = shapes::tangent_balls();
  std::vector<BoundarySample> s(1);
  s[0].point = {0, 0};
  s[0].regularity = Regularity::Angular;
  auto entries = curvature_profile(O, k, s);
  REQUIRE(entries.size() == 1);
  CHECK_FALSE(entries[0].estimate.has_value());
  CHECK_FALSE(entries[0].skip_reason.empty());
  CHECK_THROWS_AS(curvature_pv(O, {0, 0}, k), error);
}

TEST_CASE("box pair bound H <= 2 Phi(2r) for the weak kernel") {
  auto k = Kernel::piecewise_power(1.0, 3.0);
  double r = 0.5;
  auto N = shapes::box_pair(r);
  double limit = 2.0 * phi(k, 2.0 * r).value;
  for (Vec2 p : {Vec2{r, 1.5 * r}, Vec2{r, 4.0 * r}, Vec2{2.5 * r, r}}) {
    auto est = curvature_pv(N, p, k, {1e-6, 1e-6});
    CHECK(est.value <= limit + est.bar());
    CHECK(est.value > 0.0);  // the white-region mass is positive
  }
}

TEST_CASE("near-tangent pair is negative near the origin") {
  auto k = Kernel::fractional(0.5);
  auto Z = shapes::near_tangent(0.01, 1.0);
  double cx = 1.01;
  for (double y : {0.0, 0.03, 0.06}) {
    double x = cx - std::sqrt(1.0 - y * y);
    auto est = curvature_pv(Z, {x, y}, k, {1e-6, 1e-6});
    CHECK(est.value + est.bar() < 0.0);
  }
}

TEST_CASE("inclusion monotonicity at shared boundary points") {
  auto k = Kernel::fractional(0.5);
  auto C = shapes::cross_axis();
  auto Cr = shapes::perturbed_cross(0.5);
  for (double a : {0.8, 1.5, 3.0}) {
    Vec2 p{a, a};
    auto hc = curvature_pv(C, p, k, {1e-6, 1e-7});
    auto hcr = curvature_pv(Cr, p, k, {1e-6, 1e-7});
    CHECK(hc.value >= hcr.value - hc.bar() - hcr.bar());
  }
}

TEST_CASE("equivariance under rotation and translation") {
  auto k = Kernel::fractional(0.5);
  auto Cr = shapes::perturbed_cross(0.5);
  Vec2 p{0.2, 0.5};
  auto base = curvature_pv(Cr, p, k, {1e-9, 1e-9});
  double th = 0.7;
  Vec2 v{1.3, -0.4};
  auto moved = curvature_pv(Cr.rotated(th).translated(v), rot(p, th) + v, k,
                            {1e-9, 1e-9});
  CHECK(moved.value == Approx(base.value).margin(1e-9));
}

TEST_CASE("fractional scaling of the PV curvature") {
  auto k = Kernel::fractional(0.5);
  auto G = shapes::droplet_square(0.3);
  Vec2 p{0, 0.3};
  auto base = curvature_pv(G, p, k, {1e-7, 1e-7});
  for (double lam : {0.5, 2.0}) {
    auto scaled = curvature_pv(G.scaled(lam), lam * p, k, {1e-7, 1e-7});
    CHECK(std::abs(scaled.value - base.value * std::pow(lam, -0.5)) <=
          base.bar() + scaled.bar() + 1e-5 * std::abs(base.value));
  }
}

TEST_CASE("grid curvature: halfplane, ball, cross") {
  auto k = Kernel::fractional(0.5);
  {
    auto H = shapes::halfplane({0, 1}, 0.0);
    Window w{-2, -2, 2, 2};
    auto g = init_field(H, w, 4.0 / 64, 0.5);
    double v = grid_curvature(g, 32, 32, k);
    CHECK(std::abs(v) < 2.0 * g.h);
  }
  {
    auto B = shapes::ball({0, 0}, 1.0);
    Window w{-1.5, -1.5, 1.5, 1.5};
    auto g = init_field(B, w, 3.0 / 256, 0.4);
    int i = static_cast<int>(std::round((1.0 - w.x0) / g.h - 0.5));
    int j = g.ny / 2;
    double v = grid_curvature(g, i, j, k);
    CHECK(v == Approx(ball_curvature(k, 1.0)).epsilon(0.02));
  }
  {
    auto C = shapes::cross_rotated();
    Window w{-2, -2, 2, 2};
    auto g = init_field(C, w, 4.0 / 128, 0.3);
    int i = static_cast<int>(std::round((1.0 - w.x0) / g.h - 0.5));
    int j = g.ny / 2;
    double v = grid_curvature(g, i, j, k);
    CHECK(std::abs(v) < 5.0 * g.h);
  }
}

TEST_CASE("cell weight table consistency with the kernel mass") {
  auto k = Kernel::fractional(0.5);
  double h = 0.125;
  int n = 16;
  auto W = cell_weights(k, h, n, n);
  double in_table = W->total_in_table();
  double half = (n - 0.5) * h;  // covered square half-width
  auto outside_square = [&](double a) {
    auto f = [&](double th) {
      double c = std::max(std::abs(std::cos(th)), std::abs(std::sin(th)));
      return k.radial_tail(a / c);
    };
    return integrate(f, 0.0, 2.0 * pi, {1e-10, 0.0, 40000}).value;
  };
  double lhs = in_table + outside_square(half);
  double rhs = outside_square(0.5 * h);  // the singular cell carries weight 0
  CHECK(lhs == Approx(rhs).epsilon(1e-8));
}

TEST_CASE("warning flag on unreachable tolerance") {
  auto k = Kernel::fractional(0.9);
  auto B = shapes::ball({0, 0}, 1.0);
  auto est = curvature_pv(B, {1, 0}, k, {1e-14, 1e-14, 200});
  CHECK(est.warning);
}
