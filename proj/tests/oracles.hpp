#pragma once

// Test-only brute-force oracles, independent of the production evaluators:
// the production code integrates exact radial primitives along rays with
// feature-enumerated breakpoints; the oracles below sample indicators
// blindly on dense midpoint lattices and extrapolate.

#include <cmath>
#include <functional>
#include <vector>

#include "nlcf/geometry.hpp"
#include "nlcf/kernel.hpp"

namespace oracles {

// Dense midpoint-rule PV curvature for a set with indicator `inside` at a
// boundary point x0 with tangent-direction angle `tangent_angle` and local
// curvature bound C_loc.  Log-polar lattice, theta cells aligned so the
// tangent directions are cell boundaries; below rho_cut = dtheta / C_loc the
// opposite-ray pair cancels exactly and is skipped.  The leading error decays
// like M^{-(1-s_eff)}; three dyadic resolutions are extrapolated with the
// observed ratio.
inline double pv_curvature_midpoint(const std::function<bool(nlcf::Vec2)>& inside,
                                    const nlcf::Kernel& k, nlcf::Vec2 x0,
                                    double tangent_angle, double C_loc,
                                    int M, int nu, double Rfar) {
  const double pi = nlcf::pi;
  double rho_cut = (2.0 * pi / M) / std::max(C_loc, 1e-3);
  double umin = std::log(rho_cut), umax = std::log(Rfar);
  double du = (umax - umin) / nu;
  double dth = 2.0 * pi / M;
  double total = 0.0;
  std::vector<double> rr(nu), w(nu);
  for (int j = 0; j < nu; ++j) {
    rr[j] = std::exp(umin + (j + 0.5) * du);
    w[j] = k.k0(rr[j]) * rr[j] * rr[j];
  }
  for (int j = 0; j < nu; ++j) {
    long cnt = 0;  // integer sum of signs over the shell: exact cancellation
    for (int i = 0; i < M; ++i) {
      double th = tangent_angle + (i + 0.5) * dth;
      nlcf::Vec2 p{x0.x + rr[j] * std::cos(th), x0.y + rr[j] * std::sin(th)};
      cnt += inside(p) ? -1 : 1;
    }
    total += static_cast<double>(cnt) * w[j];
  }
  double H = total * du * dth;
  H += 2.0 * pi * k.radial_tail(Rfar);  // bounded sets: all outside beyond Rfar
  return H;
}

struct RichardsonResult {
  double value = 0.0;
  double ratio = 0.0;  // observed geometric ratio of successive corrections
};

// Richardson extrapolation with the provable leading order M^{-(1-s)} of the
// tangent-wedge truncation; the observed correction ratio is reported so the
// caller can verify it matches 2^{-(1-s)}.
inline RichardsonResult pv_curvature_oracle(
    const std::function<bool(nlcf::Vec2)>& inside, const nlcf::Kernel& k,
    nlcf::Vec2 x0, double tangent_angle, double C_loc, double s_exponent,
    int base_M = 2048, int nu = 4096, double Rfar = 64.0) {
  double v1 = pv_curvature_midpoint(inside, k, x0, tangent_angle, C_loc, base_M, nu, Rfar);
  double v2 = pv_curvature_midpoint(inside, k, x0, tangent_angle, C_loc, 2 * base_M, nu, Rfar);
  double v3 = pv_curvature_midpoint(inside, k, x0, tangent_angle, C_loc, 4 * base_M, nu, Rfar);
  RichardsonResult out;
  double d1 = v2 - v1, d2 = v3 - v2;
  out.ratio = d1 != 0.0 ? d2 / d1 : 0.0;
  double q = std::pow(2.0, -(1.0 - s_exponent));
  out.value = v3 + d2 * q / (1.0 - q);
  return out;
}

inline double ball_curvature_oracle(const nlcf::Kernel& k, double R, double s,
                                    int base_M = 2048) {
  auto inside = [R](nlcf::Vec2 p) { return p.x * p.x + p.y * p.y < R * R; };
  // boundary point (R, 0): tangent is vertical
  return pv_curvature_oracle(inside, k, {R, 0.0}, 0.5 * nlcf::pi, 1.0 / R, s,
                             base_M)
      .value;
}

// plain midpoint mass of a radial kernel over a disk(d e1, r): tensor
// midpoint in local polar coordinates (independent of the production
// radial-arc reduction)
inline double disk_mass_midpoint(const nlcf::Kernel& k, double d, double r,
                                 int n = 2048) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double rho = (i + 0.5) * r / n;
    double row = 0.0;
    for (int j = 0; j < n / 4; ++j) {
      double th = (j + 0.5) * 2.0 * nlcf::pi / (n / 4);
      double px = d + rho * std::cos(th), py = rho * std::sin(th);
      row += k.k0(std::hypot(px, py));
    }
    acc += row * rho * (2.0 * nlcf::pi / (n / 4)) * (r / n);
  }
  return acc;
}

// localized perimeter of the unit ball: Per_K(B_1, B_R) for R > 1 reduces to
// Int_{B_1} pot(|x|) dx with pot the complement mass; both factors by dense
// midpoint rules with power-law Richardson in the radial counts
inline double per_local_unit_ball_oracle(const nlcf::Kernel& k, double s,
                                         int n_outer = 1024) {
  auto pot = [&](double rho_x, int M, int nrad) {
    // complement mass from (rho_x, 0) by log-polar midpoint
    double gap = 1.0 - rho_x;
    double umin = std::log(std::max(1e-9, 0.05 * gap));
    double umax = std::log(64.0);
    double du = (umax - umin) / nrad;
    double dth = 2.0 * nlcf::pi / M;
    double acc = 0.0;
    for (int j = 0; j < nrad; ++j) {
      double rr = std::exp(umin + (j + 0.5) * du);
      long cnt = 0;
      for (int i = 0; i < M; ++i) {
        double th = (i + 0.5) * dth;
        double px = rho_x + rr * std::cos(th), py = rr * std::sin(th);
        if (px * px + py * py > 1.0) ++cnt;
      }
      acc += static_cast<double>(cnt) * k.k0(rr) * rr * rr * du * dth;
    }
    acc += 2.0 * nlcf::pi * k.radial_tail(64.0);
    // the inner disk of radius 0.05 gap is entirely inside B_1: no contribution
    return acc;
  };
  auto once = [&](int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double rho = (i + 0.5) / n;
      acc += 2.0 * nlcf::pi * rho * pot(rho, 512, 512) / n;
    }
    return acc;
  };
  double v1 = once(n_outer / 2), v2 = once(n_outer);
  // outer error ~ n^{-(1-s)} from the boundary layer
  double q = std::pow(0.5, 1.0 - s);
  return v2 + (v2 - v1) * q / (1.0 - q);
}

}  // namespace oracles
