#include <catch2/catch_amalgamated.hpp>

#include "nlcf/kernel.hpp"
#include "oracles.hpp"

using namespace nlcf;
using Catch::Approx;

TEST_CASE("fractional kernel construction and profile") {
  auto k = Kernel::fractional(0.5);
  CHECK(k.k0(2.0) == Approx(std::pow(2.0, -2.5)).epsilon(1e-14));
  CHECK(k.nonincreasing());
  CHECK(k.fractional_s().value() == 0.5);
  CHECK_THROWS_AS(Kernel::fractional(1.2), error);
  CHECK_THROWS_AS(Kernel::fractional(0.0), error);
}

TEST_CASE("piecewise power kernel accepted with monotone flag") {
  auto k = Kernel::piecewise_power(1.0, 3.0);
  CHECK(k.nonincreasing());
  CHECK(k.k0(0.5) == Approx(2.0));
  CHECK(k.k0(2.0) == Approx(0.125));
  auto rep = check_integrability(k);
  CHECK(rep.pass);
  CHECK(rep.near_field == Approx(0.5).epsilon(1e-6));  // int_0^1 rho^2 rho^-1
  CHECK(rep.tail == Approx(1.0).epsilon(1e-6));        // int_1^inf rho rho^-3
}

TEST_CASE("table kernel: loglog interpolation and rejections") {
  auto k = Kernel::table({0.5, 1.0, 2.0}, {4.0, 1.0, 0.25});
  // exact power law rho^-2 through the nodes
  CHECK(k.k0(0.7) == Approx(std::pow(0.7, -2.0)).epsilon(1e-12));
  CHECK(k.k0(1.5) == Approx(std::pow(1.5, -2.0)).epsilon(1e-12));
  CHECK(k.k0(0.1) == Approx(100.0).epsilon(1e-12));  // extrapolated head
  CHECK(k.k0(3.0) == 0.0);                           // beyond support
  CHECK(k.support_radius() == 2.0);
  CHECK_THROWS_AS(Kernel::table({1.0, 2.0}, {-1.0, 1.0}), error);
  CHECK_THROWS_AS(Kernel::table({2.0, 1.0}, {1.0, 1.0}), error);
}

TEST_CASE("integrability report flags divergences without crashing") {
  auto rep = check_integrability_profile([](double r) { return std::pow(r, -3.0); });
  CHECK(rep.near_diverges);
  CHECK_FALSE(rep.pass);
  auto rep2 = check_integrability_profile([](double r) { return 1.0 / r; });
  // rho^-1: near field fine, tail int rho rho^-1 diverges
  CHECK_FALSE(rep2.near_diverges);
  CHECK(rep2.tail_diverges);
  auto rep3 = check_integrability(Kernel::fractional(0.5));
  CHECK(rep3.pass);
  CHECK(rep3.near_field == Approx(2.0).epsilon(1e-6));
  CHECK(rep3.tail == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("tail mass closed forms and monotonicity") {
  auto k = Kernel::fractional(0.5);
  for (double R : {0.5, 1.0, 2.0, 4.0})
    CHECK(tail_mass(k, R) ==
          Approx(2.0 * pi * std::pow(R, -0.5) / 0.5).epsilon(1e-6));
  CHECK(tail_mass(k, 1.0) > tail_mass(k, 2.0));
  CHECK(tail_mass(k, 1e8) < 1e-2);
  auto weak = Kernel::piecewise_power(1.0, 3.0);
  CHECK(tail_mass(weak, 2.0) == Approx(pi).epsilon(1e-6));
  // cross-check against direct quadrature of the radial tail
  auto q = integrate_to_inf([&](double r) { return 2.0 * pi * r * k.k0(r); }, 2.0);
  CHECK(tail_mass(k, 2.0) == Approx(q.value).epsilon(1e-5));
}

TEST_CASE("psi bracket, homogeneity and support miss") {
  auto k = Kernel::fractional(0.5);
  double p1 = psi(k, 1.0);
  CHECK(p1 >= 0.0347);
  CHECK(p1 <= 0.0713);
  for (double r : {0.25, 0.5, 2.0})
    CHECK(psi(k, 2.0 * r) / psi(k, r) == Approx(std::pow(2.0, -0.5)).epsilon(1e-6));
  // kernel vanishing on |x| >= 1.4 misses the disk of Psi(1)
  auto kc = Kernel::table({0.01, 1.4, 1.4000001}, {1.0, 1.0, 0.0});
  CHECK(psi(kc, 1.0) == 0.0);
  // cross-check against a tensor midpoint oracle
  double m = oracles::disk_mass_midpoint(k, 1.75, 0.25, 1024);
  CHECK(p1 == Approx(m).epsilon(1e-3));
}

TEST_CASE("lambda closed form, monotonicity and inversion") {
  auto k = Kernel::fractional(0.5);
  double p1 = psi(k, 1.0);
  LambdaTable lam(k, 2.0);
  for (double r : {0.25, 0.5, 1.0, 2.0})
    CHECK(lam.lambda(r) ==
          Approx(std::pow(r, 1.5) / (1.5 * p1)).epsilon(1e-5));
  CHECK(lam.lambda(0.0) == 0.0);
  CHECK(lam.lambda(0.5) < lam.lambda(1.0));
  for (double r : {0.1, 0.5, 1.0})
    CHECK(lam.invert(lam.lambda(r)) == Approx(r).epsilon(1e-9));
  // r(t) closed form: ((1+s) Psi(1) t)^{1/(1+s)}
  double t = 0.3;
  CHECK(lam.invert(t) ==
        Approx(std::pow(1.5 * p1 * t, 1.0 / 1.5)).epsilon(1e-5));
  CHECK_THROWS_AS(lam.invert(lam.lambda(2.0) * 1.01), error);
  // weak kernel: Lambda diverges at 0
  CHECK_THROWS_AS(LambdaTable(Kernel::piecewise_power(1.0, 3.0), 1.0), error);
}

TEST_CASE("phi: finite for the weak kernel, divergent for fractional") {
  auto weak = Kernel::piecewise_power(1.0, 3.0);
  auto p = phi(weak, 0.5);
  REQUIRE(p.finite);
  CHECK(p.value > 0.0);
  // Phi(0+) -> 0
  CHECK(phi(weak, 1e-4).value < 1e-2);
  // nondecreasing in r
  CHECK(phi(weak, 0.25).value < phi(weak, 0.5).value);
  // growth bound Phi(r) <= C r |log r| for small r: fit the constant over a
  // dyadic ladder and check stability
  double worst = 0.0;
  for (double r : {1e-3, 4e-3, 1.6e-2, 6.4e-2}) {
    double v = phi(weak, r).value;
    worst = std::max(worst, v / (r * std::abs(std::log(r))));
  }
  CHECK(worst < 12.0);
  auto frac = phi(Kernel::fractional(0.5), 1.0);
  CHECK_FALSE(frac.finite);
}

TEST_CASE("regime classification") {
  for (double s : {0.1, 0.5, 0.9})
    CHECK(classify_regime(Kernel::fractional(s)) == Regime::Strong);
  CHECK(classify_regime(Kernel::piecewise_power(1.0, 3.0)) == Regime::Weak);
  // non-monotone bumpy profile with alpha = 1 head: the strong test fails,
  // and no dominating profile is available -> Undetermined
  auto bump = Kernel::table({0.1, 0.5, 0.6, 1.0, 4.0},
                            {10.0, 2.0, 3.0, 1.0, 0.001});
  CHECK_FALSE(bump.nonincreasing());
  CHECK(classify_regime(bump) == Regime::Undetermined);
  auto rep = classify_regime_report(Kernel::fractional(0.5));
  CHECK(rep.unimpiu_positive);
  CHECK(rep.unimpiu_inf > 0.0);
}

TEST_CASE("ball curvature against the brute-force oracle") {
  for (double s : {0.3, 0.5, 0.7}) {
    auto k = Kernel::fractional(s);
    double prod = ball_curvature(k, 1.0);
    double oracle = oracles::ball_curvature_oracle(k, 1.0, s, s >= 0.45 && s <= 0.55 ? 4096 : 2048);
    double otol = s == 0.5 ? 1e-4 : 1e-3;
    CHECK(std::abs(prod - oracle) / oracle < otol);
  }
}

TEST_CASE("ball curvature scaling and monotonicity") {
  auto k = Kernel::fractional(0.5);
  double c1 = ball_curvature(k, 1.0);
  for (double R : {0.5, 1.0, 2.0})
    CHECK(ball_curvature(k, 2.0 * R) / ball_curvature(k, R) ==
          Approx(std::pow(2.0, -0.5)).epsilon(1e-3));
  double prev = std::numeric_limits<double>::infinity();
  for (double R : {0.5, 1.0, 2.0, 4.0}) {
    double c = ball_curvature(k, R);
    CHECK(c > 0.0);
    CHECK(c <= prev);
    prev = c;
  }
  CHECK(c1 > 0.0);
  // weak kernel: still positive, finite
  CHECK(ball_curvature(Kernel::piecewise_power(1.0, 3.0), 1.0) > 0.0);
}

TEST_CASE("ball evolution: extinction time and the implicit clock") {
  auto k = Kernel::fractional(0.5);
  double c1 = ball_curvature(k, 1.0);
  auto traj = ball_evolution(k, 1.0);
  double T_exact = 1.0 / (c1 * 1.5);
  CHECK(traj.extinction_time == Approx(T_exact).epsilon(1e-2));
  // C(R(t)) = C(R0) - t along the trajectory
  double C0 = ball_clock(k, 1.0);
  for (std::size_t i = 1; i + 1 < traj.radii.size(); i += traj.radii.size() / 5) {
    auto [t, R] = traj.radii[i];
    if (R < 0.05) continue;
    CHECK(ball_clock(k, R) == Approx(C0 - t).margin(2e-4));
  }
  // doubling R0 multiplies T by 2^{1+s}
  auto traj2 = ball_evolution(k, 2.0);
  CHECK(traj2.extinction_time / traj.extinction_time ==
        Approx(std::pow(2.0, 1.5)).epsilon(1e-2));
  CHECK(!traj.c_of_R.empty());
}

TEST_CASE("fractional homogeneity laws") {
  for (double s : {0.3, 0.7}) {
    auto k = Kernel::fractional(s);
    double p1 = psi(k, 1.0);
    LambdaTable lam(k, 5.0);
    double l1 = lam.lambda(1.0);
    double c1 = ball_curvature(k, 1.0);
    for (double l : {0.5, 2.0, 4.0}) {
      CHECK(psi(k, l) / p1 == Approx(std::pow(l, -s)).epsilon(1e-3));
      CHECK(lam.lambda(l) / l1 == Approx(std::pow(l, 1.0 + s)).epsilon(1e-3));
      CHECK(ball_curvature(k, l) / c1 == Approx(std::pow(l, -s)).epsilon(1e-3));
    }
  }
}

TEST_CASE("regularized kernel") {
  auto k = Kernel::fractional(0.5);
  auto kd = k.regularized(0.1);
  CHECK(kd.k0(0.05) == 0.0);
  CHECK(kd.k0(0.2) == Approx(k.k0(0.2)));
  CHECK(tail_mass(kd, 1.0) == Approx(tail_mass(k, 1.0)));  // unchanged for R > delta
  CHECK(kd.second_moment(0.0, 1.0) < k.second_moment(0.0, 1.0));
}
