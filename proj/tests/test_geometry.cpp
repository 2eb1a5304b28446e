#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nlcf/geometry.hpp"

using namespace nlcf;
using Catch::Approx;

namespace {

std::vector<PlanarSet> library() {
  return {
      shapes::ball({0, 0}, 1.0),
      shapes::ball({0.5, -0.25}, 0.7),
      shapes::halfplane({0, 1}, 0.3),
      shapes::cross_axis(),
      shapes::cross_rotated(),
      shapes::perturbed_cross(0.5),
      shapes::perturbed_cross_offset(0.5, 0.2),
      shapes::complement_cross_square(0.4),
      shapes::box_pair(0.5),
      shapes::box_pair_rotated(0.5),
      shapes::box_pair_dilated(0.5, 0.25),
      shapes::droplet(),
      shapes::droplet_axis(),
      shapes::droplet_square(0.3),
      shapes::pinched_droplet(0.05, 0.3),
      shapes::tangent_balls(),
      shapes::near_tangent(0.05, 1.0),
      shapes::two_balls(1.2, 1.0),
      shapes::capsule(0.6, 0.4),
  };
}

}  // namespace

TEST_CASE("named shape point values") {
  auto C = shapes::cross_axis();
  double a = 0.8;
  CHECK(C.signed_distance({0, a}) == Approx(-a / std::sqrt(2.0)).epsilon(1e-12));
  auto Cr = shapes::perturbed_cross(0.5);
  CHECK(Cr.signed_distance({0, 0.5}) == Approx(0.0).margin(1e-14));
  CHECK(Cr.signed_distance({0, 0}) == Approx(0.5).epsilon(1e-12));
  auto O = shapes::tangent_balls();
  CHECK(O.signed_distance({0, 0}) == Approx(0.0).margin(1e-14));
  CHECK(O.signed_distance({1, 0}) == Approx(1.0).epsilon(1e-12));
  auto N = shapes::box_pair(0.5);
  CHECK(N.signed_distance({0, 0}) ==
        Approx(-0.5 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(shapes::ball({0, 0}, 1.0).signed_distance({2, 0}) == Approx(-1.0));
}

TEST_CASE("indicator agrees with the distance sign") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (const auto& E : library()) {
    for (int i = 0; i < 1000; ++i) {
      Vec2 p{U(rng), U(rng)};
      double d = E.signed_distance(p);
      if (std::abs(d) < 1e-12) continue;
      CHECK(E.inside(p) == (d > 0.0));
    }
  }
}

TEST_CASE("reflection symmetries of the cross and tangent balls") {
  auto C = shapes::cross_axis();
  auto O = shapes::tangent_balls();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    Vec2 p{U(rng), U(rng)};
    double d = C.signed_distance(p);
    CHECK(C.signed_distance({-p.x, p.y}) == Approx(d).margin(1e-13));
    CHECK(C.signed_distance({p.x, -p.y}) == Approx(d).margin(1e-13));
    // swapping the axes exchanges the cross with its complement
    CHECK(C.signed_distance({p.y, p.x}) == Approx(-d).margin(1e-13));
    double dO = O.signed_distance(p);
    CHECK(O.signed_distance({-p.x, p.y}) == Approx(dO).margin(1e-13));
    CHECK(O.signed_distance({p.x, -p.y}) == Approx(dO).margin(1e-13));
  }
}

TEST_CASE("scaling law d_{lambda E}(lambda x) = lambda d_E(x)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (const auto& E : library()) {
    for (double lam : {0.5, 2.0}) {
      PlanarSet S = E.scaled(lam);
      for (int i = 0; i < 100; ++i) {
        Vec2 p{U(rng), U(rng)};
        double d = E.signed_distance(p);
        if (!std::isfinite(d)) continue;
        CHECK(S.signed_distance(lam * p) == Approx(lam * d).margin(1e-10));
      }
    }
  }
}

TEST_CASE("erode and dilate against the dedicated offset constructions") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-2.5, 2.5);
  // {d_N >= -lambda} matches the dilated boxes with exact fillets
  auto N = shapes::box_pair(0.5);
  auto Nd_generic = N.dilated(0.25);
  auto Nd_exact = shapes::box_pair_dilated(0.5, 0.25);
  for (int i = 0; i < 2000; ++i) {
    Vec2 p{U(rng), U(rng)};
    CHECK(Nd_generic.inside(p) == Nd_exact.inside(p));
  }
  // erode/dilate duality
  auto E = shapes::perturbed_cross(0.5);
  auto a = E.eroded(0.2);
  auto b = E.complemented().dilated(0.2).complemented();
  for (int i = 0; i < 500; ++i) {
    Vec2 p{U(rng), U(rng)};
    CHECK(a.inside(p) == b.inside(p));
  }
  // erode(lambda) zero level sits where the parent distance equals lambda
  auto er = E.eroded(0.3);
  CHECK(er.signed_distance({0, 0}) == Approx(E.signed_distance({0, 0}) - 0.3));
}

TEST_CASE("boundary sampling: ball normals and corner flags") {
  auto B = shapes::ball({0, 0}, 1.0);
  auto samples = boundary_sample(B, 2.0 * pi / 8.0);
  int smooth = 0;
  for (const auto& s : samples) {
    CHECK(s.regularity == Regularity::Smooth);
    CHECK(norm(s.normal) == Approx(1.0).epsilon(1e-12));
    CHECK(dot(s.normal, unit(s.point)) == Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(B.signed_distance(s.point)) < 1e-12);
    ++smooth;
  }
  CHECK(smooth == 8);

  auto Cr = shapes::perturbed_cross(0.5);
  auto cs = boundary_sample(Cr, 0.2, Window{-3, -3, 3, 3});
  int corners = 0;
  for (const auto& s : cs)
    if (s.regularity == Regularity::Angular) {
      ++corners;
      CHECK(std::abs(std::abs(s.point.x) - 0.5) < 1e-12);
      CHECK(std::abs(std::abs(s.point.y) - 0.5) < 1e-12);
    }
  CHECK(corners == 4);

  // the barrier pair: two circles, radial normals from the centers
  auto F = shapes::two_balls(1.3, 1.0);
  for (const auto& s : boundary_sample(F, 0.5)) {
    if (s.regularity == Regularity::Angular) continue;
    Vec2 c = s.point.x > 0 ? Vec2{1.3, 0} : Vec2{-1.3, 0};
    CHECK(dot(s.normal, unit(s.point - c)) == Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("set distance") {
  auto b1 = shapes::ball({0, 0}, 1.0);
  auto b2 = shapes::ball({0, 0}, 2.0);
  CHECK(set_distance(b1, b2) == Approx(1.0).epsilon(1e-6));
  // shared boundary arcs: distance zero
  CHECK(set_distance(shapes::cross_axis(), shapes::perturbed_cross(0.5)) ==
        Approx(0.0).margin(1e-9));
  // the dilated boxes sit at distance lambda
  CHECK(set_distance(shapes::box_pair(0.5), shapes::box_pair_dilated(0.5, 0.25)) ==
        Approx(0.25).epsilon(1e-6));
}

TEST_CASE("shape parameter validation") {
  CHECK_THROWS_AS(shapes::near_tangent(0.2, 1.0), error);     // delta > 1/8
  CHECK_THROWS_AS(shapes::pinched_droplet(0.4, 0.3), error);  // delta >= r
  CHECK_THROWS_AS(shapes::pinched_droplet(0.05, 0.6), error); // r >= 1/2
  CHECK_THROWS_AS(shapes::ball({0, 0}, -1.0), error);
  CHECK_THROWS_AS(shapes::box_pair_dilated(0.5, 0.6), error);
  CHECK_THROWS_AS(shapes::two_balls(0.5, 1.0), error);  // overlapping
}

TEST_CASE("transforms move features and corners exactly") {
  auto Cr = shapes::perturbed_cross(0.5);
  auto R = Cr.rotated(0.5 * pi);
  // the complementary construction coincides with the rotated perturbed cross
  auto CC = shapes::complement_cross_square(0.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 500; ++i) {
    Vec2 p{U(rng), U(rng)};
    CHECK(R.inside(p) == CC.inside(p));
  }
  auto T = shapes::ball({0, 0}, 1.0).translated({2, 1});
  CHECK(T.signed_distance({2, 1}) == Approx(1.0));
  CHECK(T.corners().empty());
}

TEST_CASE("local boundary info") {
  auto B = shapes::ball({0, 0}, 2.0);
  auto info = B.local_info({2, 0});
  CHECK_FALSE(info.at_corner);
  CHECK(info.curvature_bound == Approx(0.5));
  CHECK(std::abs(dot(info.tangent, Vec2{1, 0})) < 1e-12);
  auto C = shapes::cross_axis();
  auto ci = C.local_info({0, 0});
  CHECK(ci.at_corner);
  CHECK(ci.corner_sym == CornerSym::OddZero);
  auto O = shapes::tangent_balls();
  auto oi = O.local_info({0, 0});
  CHECK(oi.at_corner);
  CHECK(oi.corner_sym == CornerSym::None);
  // feature size on the cross grows with the distance from the center
  auto li = C.local_info({1, 1});
  CHECK(li.feature_size == Approx(std::sqrt(2.0)).epsilon(1e-9));
}
