#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "nlcf/curvature.hpp"
#include "nlcf/geometry.hpp"
#include "nlcf/kernel.hpp"

namespace nlcf {

// ---------------------------------------------------------------------------
// kernel mass of a region seen from a point, by the exact-radial ray scan

namespace detail {

// sigma is a set-valued weight at a midpoint; candidates must contain every
// boundary crossing radius of the region along the ray
template <class Sigma, class Candidates>
double region_mass_from(const Kernel& k, Vec2 x, const Sigma& sigma,
                        const Candidates& candidates, double rel = 1e-6,
                        std::size_t max_panels = 4000) {
  auto ray = [&](double th) {
    Vec2 u{std::cos(th), std::sin(th)};
    std::vector<double> ts = candidates(x, u);
    std::sort(ts.begin(), ts.end());
    double acc = 0.0, lo = 0.0;
    for (double t : ts) {
      if (t <= lo) continue;
      double s = sigma(x + 0.5 * (lo + t) * u);
      if (s != 0.0) acc += s * k.radial_mass(lo, t);
      lo = t;
    }
    double s = sigma(x + (2.0 * lo + 1.0) * u);
    if (s != 0.0) acc += s * k.radial_tail(lo);
    return acc;
  };
  auto q = integrate(ray, 0.0, 2.0 * pi, {rel, 1e-14, max_panels});
  return q.value;
}

}  // namespace detail

// localized nonlocal perimeter Per_K(E, B_R) (localization ball centered at 0)
struct PerimeterResult {
  double value = 0.0;
  double error = 0.0;
};

inline PerimeterResult per_local(const PlanarSet& E, const Kernel& k, double R,
                                 double rel = 1e-2) {
  if (!E.ray_valid())
    throw error("per_local: set has no exact boundary features");
  if (k.is_zero()) return {0.0, 0.0};
  auto ball_candidates = [&](Vec2 x, Vec2 u) {
    std::vector<double> ts = E.ray_candidates(x, u, 0.0);
    Feature::circle({0, 0}, R).ray_candidates(x, u, ts);
    return ts;
  };
  // term 1: x in E cap B_R against the complement of E; the outer integral
  // runs over exact vertical slices of E cap B_R so the integrand has no
  // indicator jumps, only integrable endpoint singularities
  const double inner_rel = 1e-4;
  auto pot_out = [&](Vec2 x) {
    auto sigma = [&](Vec2 p) { return E.inside(p) ? 0.0 : 1.0; };
    auto cand = [&](Vec2 xx, Vec2 u) { return E.ray_candidates(xx, u, 0.0); };
    return detail::region_mass_from(k, x, sigma, cand, inner_rel);
  };
  auto column = [&](double px) {
    Vec2 base{px, -R - 1.0};
    std::vector<double> ts = E.ray_candidates(base, {0, 1}, 0.0);
    Feature::circle({0, 0}, R).ray_candidates(base, {0, 1}, ts);
    std::sort(ts.begin(), ts.end());
    auto in_slice = [&](double t) {
      Vec2 p = base + t * Vec2{0, 1};
      return E.inside(p) && norm(p) <= R;
    };
    double acc = 0.0, err = 0.0;
    double lo = 0.0;
    for (double t : ts) {
      if (t <= lo) continue;
      if (in_slice(0.5 * (lo + t))) {
        auto q = integrate([&](double tt) { return pot_out(base + tt * Vec2{0, 1}); },
                           lo, t, {1e-3, 0.0, 200});
        acc += q.value;
        err += q.error;
      }
      lo = t;
    }
    return std::pair<double, double>(acc, err);
  };
  double q1v = 0.0, q1e = 0.0;
  {
    auto q = integrate([&](double px) { return column(px).first; }, -R, R,
                       {rel, 0.0, 600});
    q1v = q.value;
    q1e = q.error + 3.0 * inner_rel * std::abs(q.value);
  }
  QuadResult q1{q1v, q1e, true, false};
  // term 2: x in E minus B_R against B_R minus E; the integrand decays like
  // the kernel tail, handled by dyadic polar shells
  auto inner2 = [&](Vec2 x) {
    auto sigma = [&](Vec2 p) {
      return (norm(p) <= R && !E.inside(p)) ? 1.0 : 0.0;
    };
    return detail::region_mass_from(k, x, sigma, ball_candidates, 1e-5);
  };
  double v2 = 0.0, e2 = 0.0;
  if (E.unbounded() || E.diameter_hint() > 2.0 * R) {
    auto shell = [&](double rho) {
      auto g = [&](double th) {
        Vec2 p{rho * std::cos(th), rho * std::sin(th)};
        if (!E.inside(p)) return 0.0;
        return inner2(p) * rho;
      };
      return integrate(g, 0.0, 2.0 * pi, {1e-4, 1e-12, 2000}).value;
    };
    ImproperOpts o;
    o.rel = rel;
    o.panel_tol = {1e-4, 0.0, 256};
    auto q2 = integrate_to_inf(shell, R, o);
    if (q2.diverged) throw error("per_local: outer interaction diverges");
    v2 = q2.value;
    e2 = q2.error;
  }
  return {q1.value + v2, q1.error + e2};
}

// ---------------------------------------------------------------------------
// the W_r identity for the perturbed cross

struct PerimeterDiffReport {
  double r = 0.0;
  double R = 0.0;
  double diff = 0.0;              // Per_K(C_r, B_R) - Per_K(C, B_R)
  double bound = 0.0;             // -2 Int_{W_r} Psi(|x2|)
  double quadrature_error = 0.0;  // certified bar on diff
  double bound_error = 0.0;
  bool frame_rotated = false;     // computed in the conobis frame
};

// Per_K(C_r, B_R) - Per_K(C, B_R) computed directly from the identity
//   diff = Int_{W_r} [ mass(complement of C_r) - mass(C) ] dx,
// never as a difference of two perimeters.
inline PerimeterDiffReport per_diff_cross(const Kernel& k, double r, double R,
                                          double rel = 5e-3,
                                          bool conobis_frame = false) {
  if (!(r > 0)) throw error("per_diff_cross: r must be positive");
  if (!(R > std::sqrt(2.0) * r))
    throw error("per_diff_cross: need R > sqrt(2) r so that C_r leaves B_R unchanged");
  PerimeterDiffReport rep;
  rep.r = r;
  rep.R = R;
  rep.frame_rotated = conobis_frame;
  const double ang = conobis_frame ? 0.25 * pi : 0.0;
  PlanarSet C = conobis_frame ? shapes::cross_axis().rotated(ang)
                              : shapes::cross_axis();
  PlanarSet Cr = conobis_frame ? shapes::perturbed_cross(r).rotated(ang)
                               : shapes::perturbed_cross(r);
  const double inner_rel = 1e-3;
  auto D = [&](Vec2 x_axis) {
    // x parameterized in the axis frame, rotated into the working frame
    Vec2 x = conobis_frame ? rot(x_axis, ang) : x_axis;
    auto sigma = [&](Vec2 p) {
      double s = 0.0;
      if (!Cr.inside(p)) s += 1.0;  // complement of C_r
      if (C.inside(p)) s -= 1.0;    // C
      return s;
    };
    auto cand = [&](Vec2 xx, Vec2 u) {
      std::vector<double> ts = Cr.ray_candidates(xx, u, 0.0);
      C.ray_candidates(xx, u, ts);
      return ts;
    };
    return detail::region_mass_from(k, x, sigma, cand, inner_rel, 600);
  };
  // W_r in the axis frame: {|x1| < |x2| < r}; restrict to the quarter
  // {0 < x1 < x2 < r} by the two mirror symmetries.  The substitutions
  // a = 1 - (1-alpha)^2, b = 1 - (1-beta)^2 absorb the s < 1 edge
  // singularities at the cross edge (a -> 1) and the square edge (b -> 1).
  auto f = [&](double alpha, double beta) {
    double a = 1.0 - (1.0 - alpha) * (1.0 - alpha);
    double b = 1.0 - (1.0 - beta) * (1.0 - beta);
    double jac = 4.0 * (1.0 - alpha) * (1.0 - beta);
    double y = r * b;
    double xi = y * a;
    return D({xi, y}) * r * y * jac;
  };
  auto q = integrate2d(f, 0.0, 1.0, 0.0, 1.0, {rel, 0.0, 3000});
  rep.diff = 4.0 * q.value;
  rep.quadrature_error = 4.0 * q.error + 4.0 * inner_rel * std::abs(q.value) * 3.0;
  // bound: -2 Int_{W_r} Psi(|x2|) dx = -8 Int_0^r y Psi(y) dy
  auto g = [&](double y) { return y * psi(k, y, 1e-8); };
  auto qb = integrate(g, 0.0, r, {1e-7, 0.0, 4000});
  rep.bound = -8.0 * qb.value;
  rep.bound_error = 8.0 * qb.error + 8.0 * 1e-8 * std::abs(qb.value);
  return rep;
}

inline Kernel delta_regularize(const Kernel& k, double delta) {
  return k.regularized(delta);
}

struct NonminimalityWitness {
  double r = 0.0;
  PerimeterDiffReport report;
  double margin = 0.0;  // -(diff + bar), positive when certified
};

// scan the r-grid and return the r whose certified diff + bar < 0 with the
// largest margin; nullopt when nothing certifies
inline std::optional<NonminimalityWitness> find_nonminimality_witness(
    const Kernel& k, double R, const std::vector<double>& r_grid,
    double rel = 5e-3) {
  std::optional<NonminimalityWitness> best;
  for (double r : r_grid) {
    if (!(R > std::sqrt(2.0) * r)) continue;
    auto rep = per_diff_cross(k, r, R, rel);
    double margin = -(rep.diff + rep.quadrature_error);
    if (margin > 0 && (!best || margin > best->margin))
      best = NonminimalityWitness{r, rep, margin};
  }
  return best;
}

}  // namespace nlcf
