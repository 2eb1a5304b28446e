#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "nlcf/geometry.hpp"

namespace nlcf {

// Truncated signed-distance field on a uniform grid of cell centers.
// u = clamp(d_E, +-M); the asymptotic model describes the set outside the
// window (exact for crosses/boxes/halfplanes, empty for bounded sets).
struct GridField {
  Window win;
  double h = 0.0;
  int nx = 0, ny = 0;
  double M = 0.0;
  std::vector<double> u;
  AsymModel model;
  // the field may be a shifted distance (ladder members): a u-level L
  // corresponds to the model level set {d_model >= L - model_shift}
  double model_shift = 0.0;

  double& at(int i, int j) { return u[static_cast<std::size_t>(j) * nx + i]; }
  double at(int i, int j) const { return u[static_cast<std::size_t>(j) * nx + i]; }
  Vec2 center(int i, int j) const {
    return {win.x0 + (i + 0.5) * h, win.y0 + (j + 0.5) * h};
  }
  bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
};

inline GridField init_field(const PlanarSet& E, Window win, double h, double M,
                            double level_shift = 0.0) {
  if (!(h > 0) || !(M > 0)) throw error("init_field: h and M must be positive");
  GridField g;
  g.nx = std::max(4, static_cast<int>(std::llround(win.width() / h)));
  g.h = win.width() / g.nx;
  g.ny = std::max(4, static_cast<int>(std::llround(win.height() / g.h)));
  g.win = win;
  g.win.y1 = win.y0 + g.ny * g.h;  // keep cells square
  g.M = M;
  g.model = E.asymptotic();
  g.model_shift = level_shift;
  g.u.resize(static_cast<std::size_t>(g.nx) * g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double d = E.signed_distance(g.center(i, j)) + level_shift;
      g.at(i, j) = std::clamp(d, -M, M);
    }
  if (g.model.kind == AsymModel::Kind::Vanishing) {
    for (int i = 0; i < g.nx; ++i)
      if (g.at(i, 0) >= 0.0 || g.at(i, g.ny - 1) >= 0.0)
        throw error("init_field: window too small, zero level reaches the edge");
    for (int j = 0; j < g.ny; ++j)
      if (g.at(0, j) >= 0.0 || g.at(g.nx - 1, j) >= 0.0)
        throw error("init_field: window too small, zero level reaches the edge");
  }
  return g;
}

// ---------------------------------------------------------------------------
// zero-contour extraction (marching squares on the cell-center lattice)

struct ContourSegment {
  Vec2 a, b;
};

inline std::vector<ContourSegment> extract_contour(const GridField& g,
                                                   double level = 0.0) {
  std::vector<ContourSegment> segs;
  auto ip = [&](Vec2 p0, double v0, Vec2 p1, double v1) {
    double t = v0 / (v0 - v1);
    return p0 + t * (p1 - p0);
  };
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      double v00 = g.at(i, j) - level, v10 = g.at(i + 1, j) - level;
      double v01 = g.at(i, j + 1) - level, v11 = g.at(i + 1, j + 1) - level;
      int code = (v00 >= 0 ? 1 : 0) | (v10 >= 0 ? 2 : 0) | (v11 >= 0 ? 4 : 0) |
                 (v01 >= 0 ? 8 : 0);
      if (code == 0 || code == 15) continue;
      Vec2 p00 = g.center(i, j), p10 = g.center(i + 1, j);
      Vec2 p01 = g.center(i, j + 1), p11 = g.center(i + 1, j + 1);
      Vec2 eb = ip(p00, v00, p10, v10);  // bottom
      Vec2 er = ip(p10, v10, p11, v11);  // right
      Vec2 et = ip(p01, v01, p11, v11);  // top
      Vec2 el = ip(p00, v00, p01, v01);  // left
      switch (code) {
        case 1:  segs.push_back({el, eb}); break;
        case 2:  segs.push_back({eb, er}); break;
        case 3:  segs.push_back({el, er}); break;
        case 4:  segs.push_back({er, et}); break;
        case 6:  segs.push_back({eb, et}); break;
        case 7:  segs.push_back({el, et}); break;
        case 8:  segs.push_back({et, el}); break;
        case 9:  segs.push_back({et, eb}); break;
        case 11: segs.push_back({et, er}); break;
        case 12: segs.push_back({er, el}); break;
        case 13: segs.push_back({er, eb}); break;
        case 14: segs.push_back({eb, el}); break;
        case 5:
        case 10: {
          // saddle: split by the cell-center average; an exactly balanced
          // saddle (a symmetric crossing) emits the full X so that mirror
          // symmetries of the field survive the extraction
          double c = 0.25 * (v00 + v10 + v01 + v11);
          double scale = std::abs(v00) + std::abs(v10) + std::abs(v01) + std::abs(v11);
          if (std::abs(c) <= 1e-14 * scale) {
            segs.push_back({el, et});
            segs.push_back({er, eb});
            segs.push_back({el, eb});
            segs.push_back({er, et});
          } else if ((code == 5) == (c >= 0)) {
            segs.push_back({el, et});
            segs.push_back({er, eb});
          } else {
            segs.push_back({el, eb});
            segs.push_back({er, et});
          }
          break;
        }
      }
    }
  return segs;
}

inline std::vector<std::vector<Vec2>> stitch_polylines(
    const std::vector<ContourSegment>& segs, double tol) {
  // join segments end-to-end; deterministic by input order
  std::vector<std::vector<Vec2>> lines;
  std::vector<bool> used(segs.size(), false);
  auto key = [&](Vec2 p) {
    return std::pair<long long, long long>(
        static_cast<long long>(std::llround(p.x / tol)),
        static_cast<long long>(std::llround(p.y / tol)));
  };
  std::multimap<std::pair<long long, long long>, std::size_t> heads, tails;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    heads.insert({key(segs[s].a), s});
    tails.insert({key(segs[s].b), s});
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    std::vector<Vec2> line{segs[s].a, segs[s].b};
    // extend forward
    bool grew = true;
    while (grew) {
      grew = false;
      auto range = heads.equal_range(key(line.back()));
      for (auto it = range.first; it != range.second; ++it) {
        if (used[it->second]) continue;
        used[it->second] = true;
        line.push_back(segs[it->second].b);
        grew = true;
        break;
      }
    }
    // extend backward
    grew = true;
    while (grew) {
      grew = false;
      auto range = tails.equal_range(key(line.front()));
      for (auto it = range.first; it != range.second; ++it) {
        if (used[it->second]) continue;
        used[it->second] = true;
        line.insert(line.begin(), segs[it->second].a);
        grew = true;
        break;
      }
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

// ---------------------------------------------------------------------------
// redistancing: rebuild u as the clamped distance to the current zero contour

inline void redistance(GridField& g) {
  auto segs = extract_contour(g);
  if (segs.empty()) throw error("redistance: empty zero contour");
  const double reach = g.M + 2.0 * g.h;
  std::vector<double> dist(g.u.size(), std::numeric_limits<double>::infinity());
  auto seg_dist = [](Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double L2 = dot(ab, ab);
    double t = L2 > 0 ? std::clamp(dot(p - a, ab) / L2, 0.0, 1.0) : 0.0;
    return norm(p - (a + t * ab));
  };
  for (const auto& s : segs) {
    double xlo = std::min(s.a.x, s.b.x) - reach, xhi = std::max(s.a.x, s.b.x) + reach;
    double ylo = std::min(s.a.y, s.b.y) - reach, yhi = std::max(s.a.y, s.b.y) + reach;
    int i0 = std::max(0, static_cast<int>(std::floor((xlo - g.win.x0) / g.h)));
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((xhi - g.win.x0) / g.h)));
    int j0 = std::max(0, static_cast<int>(std::floor((ylo - g.win.y0) / g.h)));
    int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((yhi - g.win.y0) / g.h)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        double d = seg_dist(g.center(i, j), s.a, s.b);
        double& cur = dist[static_cast<std::size_t>(j) * g.nx + i];
        if (d < cur) cur = d;
      }
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double sgn = g.at(i, j) >= 0 ? 1.0 : -1.0;
      double d = dist[static_cast<std::size_t>(j) * g.nx + i];
      if (std::isinf(d)) d = g.M;
      g.at(i, j) = sgn * std::min(d, g.M);
    }
}

// area of {u >= level} by cell counting
inline double superlevel_area(const GridField& g, double level = 0.0) {
  std::size_t n = 0;
  for (double v : g.u)
    if (v >= level) ++n;
  return static_cast<double>(n) * g.h * g.h;
}

}  // namespace nlcf
