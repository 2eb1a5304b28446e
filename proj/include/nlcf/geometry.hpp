#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlcf/quadrature.hpp"

namespace nlcf {

struct Vec2 {
  double x = 0.0, y = 0.0;
};
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 unit(Vec2 a) {
  double n = norm(a);
  return n > 0 ? Vec2{a.x / n, a.y / n} : Vec2{1.0, 0.0};
}
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 rot(Vec2 a, double th) {
  double c = std::cos(th), s = std::sin(th);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

struct Window {
  double x0 = -8.0, y0 = -8.0, x1 = 8.0, y1 = 8.0;
  bool contains(Vec2 p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// ---------------------------------------------------------------------------
// boundary features: linear pieces (segments / half-lines / lines) and
// circular arcs, with exact point distances and ray crossings

struct Feature {
  enum class Kind { Linear, Arc };
  Kind kind = Kind::Linear;
  // Linear: p(t) = base + t dir, t in [t0, t1], dir unit
  Vec2 base, dir;
  double t0 = 0.0, t1 = 0.0;
  // Arc: angles CCW in [a0, a1], a full circle has a1 - a0 = 2 pi
  Vec2 center;
  double radius = 0.0, a0 = 0.0, a1 = 0.0;

  static Feature segment(Vec2 a, Vec2 b) {
    Feature f;
    f.kind = Kind::Linear;
    f.base = a;
    f.dir = unit(b - a);
    f.t0 = 0.0;
    f.t1 = norm(b - a);
    return f;
  }
  static Feature half_line(Vec2 a, Vec2 d) {
    Feature f;
    f.kind = Kind::Linear;
    f.base = a;
    f.dir = unit(d);
    f.t0 = 0.0;
    f.t1 = std::numeric_limits<double>::infinity();
    return f;
  }
  static Feature line(Vec2 a, Vec2 d) {
    Feature f = half_line(a, d);
    f.t0 = -std::numeric_limits<double>::infinity();
    return f;
  }
  static Feature arc(Vec2 c, double R, double a0, double a1) {
    Feature f;
    f.kind = Kind::Arc;
    f.center = c;
    f.radius = R;
    f.a0 = a0;
    f.a1 = a1;
    return f;
  }
  static Feature circle(Vec2 c, double R) { return arc(c, R, 0.0, 2.0 * pi); }

  bool bounded() const {
    if (kind == Kind::Arc) return true;
    return std::isfinite(t0) && std::isfinite(t1);
  }

  double curvature_bound() const {
    return kind == Kind::Arc ? 1.0 / radius : 0.0;
  }

  Vec2 point_at(double t) const {
    if (kind == Kind::Linear) return base + t * dir;
    return center + radius * Vec2{std::cos(t), std::sin(t)};
  }

  double length() const {
    if (kind == Kind::Linear) return t1 - t0;
    return radius * (a1 - a0);
  }

  double distance(Vec2 p) const {
    if (kind == Kind::Linear) {
      double t = std::clamp(dot(p - base, dir), t0, t1);
      return norm(p - (base + t * dir));
    }
    Vec2 v = p - center;
    double ang = std::atan2(v.y, v.x);
    // normalize into [a0, a0 + 2 pi)
    double a = ang;
    while (a < a0) a += 2.0 * pi;
    while (a >= a0 + 2.0 * pi) a -= 2.0 * pi;
    if (a <= a1) return std::abs(norm(v) - radius);
    double d0 = norm(p - point_at(a0));
    double d1 = norm(p - point_at(a1));
    return std::min(d0, d1);
  }

  // crossing radii of the ray origin + t u (unit u) with the carrier
  // line/circle; a superset of the true boundary crossings is fine
  void ray_candidates(Vec2 o, Vec2 u, std::vector<double>& out) const {
    if (kind == Kind::Linear) {
      double den = cross(dir, u);
      if (std::abs(den) < 1e-300) return;
      double t = cross(dir, base - o) / den;
      if (t > 0 && std::isfinite(t)) out.push_back(t);
      return;
    }
    Vec2 w = o - center;
    double b = dot(u, w);
    double c = dot(w, w) - radius * radius;
    double disc = b * b - c;
    if (disc < 0) return;
    double sq = std::sqrt(disc);
    if (-b - sq > 0) out.push_back(-b - sq);
    if (-b + sq > 0) out.push_back(-b + sq);
  }

  Feature transformed(double scale, double angle, Vec2 shift) const {
    Feature f = *this;
    if (kind == Kind::Linear) {
      f.base = scale * rot(base, angle) + shift;
      f.dir = rot(dir, angle);
      f.t0 = t0 * scale;
      f.t1 = t1 * scale;
    } else {
      f.center = scale * rot(center, angle) + shift;
      f.radius = radius * scale;
      f.a0 = a0 + angle;
      f.a1 = a1 + angle;
    }
    return f;
  }
};

// ---------------------------------------------------------------------------

enum class CornerSym { None, OddZero };  // OddZero: declared exact symmetry, PV value 0

struct CornerInfo {
  Vec2 p;
  CornerSym sym = CornerSym::None;
};

// asymptotic out-of-window behavior, used by the grid flow's tail closure
struct AsymModel {
  enum class Kind { Vanishing, CrossAxis, CrossRotated, Box, Halfplane, None };
  Kind kind = Kind::Vanishing;
  double box_r = 0.0;
  bool box_rotated = false;
  Vec2 hp_normal{0.0, 1.0};  // set = {n . x <= c}
  double hp_offset = 0.0;

  // indicator of the level set {d_model >= lambda}
  bool level_inside(Vec2 p, double lambda) const {
    switch (kind) {
      case Kind::Vanishing:
        return false;
      case Kind::CrossAxis:
        return (std::abs(p.x) - std::abs(p.y)) / std::sqrt(2.0) >= lambda;
      case Kind::CrossRotated: {
        double d = std::min(std::abs(p.x), std::abs(p.y));
        double sd = (p.x * p.y >= 0.0) ? d : -d;
        return sd >= lambda;
      }
      case Kind::Box: {
        double sd;
        if (!box_rotated) {
          double d1 = std::min(p.x - box_r, p.y - box_r);
          double d2 = std::min(-p.x - box_r, -p.y - box_r);
          double din = std::max(d1, d2);
          if (din >= 0) {
            sd = din;
          } else {
            auto q = [&](double sx, double sy) {
              double dx = std::max(box_r - sx * p.x, 0.0);
              double dy = std::max(box_r - sy * p.y, 0.0);
              return std::hypot(dx, dy);
            };
            sd = -std::min(q(1, 1), q(-1, -1));
          }
        } else {
          auto q = [&](double sx, double sy) {
            double dx = std::max(box_r - sx * p.x, 0.0);
            double dy = std::max(box_r - sy * p.y, 0.0);
            return std::hypot(dx, dy);
          };
          double din1 = std::min(-p.x - box_r, p.y - box_r);
          double din2 = std::min(p.x - box_r, -p.y - box_r);
          double din = std::max(din1, din2);
          sd = din >= 0 ? din : -std::min(q(-1, 1), q(1, -1));
        }
        return sd >= lambda;
      }
      case Kind::Halfplane:
        return hp_offset - dot(hp_normal, p) >= lambda;
      case Kind::None:
        return false;
    }
    return false;
  }

  // carrier lines/circles of the level boundary, for ray crossings
  void level_candidates(double lambda, Vec2 o, Vec2 u,
                        std::vector<double>& out) const {
    auto addline = [&](Vec2 a, Vec2 d) {
      Feature::line(a, d).ray_candidates(o, u, out);
    };
    double s2 = std::sqrt(2.0);
    switch (kind) {
      case Kind::Vanishing:
      case Kind::None:
        return;
      case Kind::CrossAxis:
        addline({s2 * lambda, 0.0}, unit({1.0, 1.0}));
        addline({-s2 * lambda, 0.0}, unit({1.0, 1.0}));
        addline({s2 * lambda, 0.0}, unit({1.0, -1.0}));
        addline({-s2 * lambda, 0.0}, unit({1.0, -1.0}));
        return;
      case Kind::CrossRotated:
        addline({lambda, 0.0}, {0.0, 1.0});
        addline({-lambda, 0.0}, {0.0, 1.0});
        addline({0.0, lambda}, {1.0, 0.0});
        addline({0.0, -lambda}, {1.0, 0.0});
        return;
      case Kind::Box: {
        double off = box_r + lambda;
        addline({off, 0.0}, {0.0, 1.0});
        addline({-off, 0.0}, {0.0, 1.0});
        addline({0.0, off}, {1.0, 0.0});
        addline({0.0, -off}, {1.0, 0.0});
        if (lambda < 0.0) {
          double rr = -lambda;
          for (Vec2 c : {Vec2{box_r, box_r}, Vec2{-box_r, -box_r},
                         Vec2{-box_r, box_r}, Vec2{box_r, -box_r}})
            Feature::circle(c, rr).ray_candidates(o, u, out);
        }
        return;
      }
      case Kind::Halfplane:
        addline((hp_offset - lambda) * hp_normal, perp(hp_normal));
        return;
    }
  }
};

// ---------------------------------------------------------------------------

enum class Regularity { Smooth, Angular };

struct BoundarySample {
  Vec2 point;
  Vec2 normal;  // outward unit normal (bisector direction at corners)
  Regularity regularity = Regularity::Smooth;
  double curvature_bound = 0.0;  // local C^{1,1} bound (0 on straight pieces)
  double feature_size = 0.0;
  double arclength = 0.0;
  bool partial_window = false;
};

struct LocalBoundaryInfo {
  double dist = 0.0;       // distance to the boundary
  bool at_corner = false;
  CornerSym corner_sym = CornerSym::None;
  Vec2 tangent;
  double curvature_bound = 0.0;
  double feature_size = 0.0;
};

// Analytic planar set: exact indicator plus an exact boundary-feature list
// for the named constructions; generic boolean combinations fall back to
// min/max signed-distance composition (exact for the disjoint-or-nested
// combinations used here, approximate near interacting boundaries).
class PlanarSet {
 public:
  PlanarSet() = default;

  bool inside(Vec2 p) const { return impl_->inside(p); }

  double signed_distance(Vec2 p) const {
    if (impl_->distance_override) return impl_->distance_override(p);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& f : impl_->features) d = std::min(d, f.distance(p));
    if (impl_->features.empty()) d = std::numeric_limits<double>::infinity();
    return impl_->inside(p) ? d : -d;
  }

  const std::vector<Feature>& boundary() const { return impl_->features; }
  const std::vector<CornerInfo>& corners() const { return impl_->corners; }
  bool distance_exact() const { return impl_->exact; }
  // features + indicator fit for ray-crossing enumeration (false only for the
  // generic offset modifiers, whose features are carriers of the child set)
  bool ray_valid() const { return impl_->ray_valid; }
  bool unbounded() const { return impl_->unbounded; }
  double diameter_hint() const { return impl_->diameter; }
  const AsymModel& asymptotic() const { return impl_->model; }
  const std::string& describe() const { return impl_->name; }

  // all candidate crossing radii of the ray o + t u with the boundary
  std::vector<double> ray_candidates(Vec2 o, Vec2 u, double tmin) const {
    std::vector<double> ts;
    for (const auto& f : impl_->features) f.ray_candidates(o, u, ts);
    std::vector<double> out;
    for (double t : ts)
      if (t > tmin && std::isfinite(t)) out.push_back(t);
    std::sort(out.begin(), out.end());
    return out;
  }

  // appending form, for combining several sets' carriers on one ray
  void ray_candidates(Vec2 o, Vec2 u, std::vector<double>& out) const {
    for (const auto& f : impl_->features) f.ray_candidates(o, u, out);
  }

  LocalBoundaryInfo local_info(Vec2 x) const {
    LocalBoundaryInfo info;
    info.dist = std::abs(signed_distance(x));
    // corner proximity
    double cdist = std::numeric_limits<double>::infinity();
    const CornerInfo* best = nullptr;
    for (const auto& c : impl_->corners) {
      double d = norm(x - c.p);
      if (d < cdist) {
        cdist = d;
        best = &c;
      }
    }
    if (best && cdist < 1e-9 * scale()) {
      info.at_corner = true;
      info.corner_sym = best->sym;
      info.feature_size = 0.0;
      return info;
    }
    // owning feature
    std::size_t own = 0;
    double fdist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < impl_->features.size(); ++i) {
      double d = impl_->features[i].distance(x);
      if (d < fdist) {
        fdist = d;
        own = i;
      }
    }
    const Feature& f = impl_->features[own];
    if (f.kind == Feature::Kind::Linear) {
      info.tangent = f.dir;
    } else {
      Vec2 v = unit(x - f.center);
      info.tangent = perp(v);
    }
    info.curvature_bound = f.curvature_bound();
    double fs = cdist;
    for (std::size_t i = 0; i < impl_->features.size(); ++i) {
      if (i == own) continue;
      fs = std::min(fs, impl_->features[i].distance(x));
    }
    if (f.kind == Feature::Kind::Arc) fs = std::min(fs, f.radius);
    if (!std::isfinite(fs)) fs = scale();
    info.feature_size = std::max(fs, 0.0);
    return info;
  }

  PlanarSet translated(Vec2 v) const { return transformed(1.0, 0.0, v); }
  PlanarSet rotated(double th) const { return transformed(1.0, th, {0, 0}); }
  PlanarSet scaled(double s) const {
    if (!(s > 0)) throw error("scale factor must be positive");
    return transformed(s, 0.0, {0, 0});
  }

  PlanarSet transformed(double s, double th, Vec2 shift) const {
    auto self = impl_;
    Impl out;
    out.name = impl_->name + "+xf";
    out.exact = impl_->exact;
    out.ray_valid = impl_->ray_valid;
    out.unbounded = impl_->unbounded;
    out.diameter = impl_->diameter * s;
    // asymptotic models survive pure scaling; the vanishing model survives
    // everything; halfplanes transform; the rest degrade to None
    out.model = impl_->model;
    bool rigid_moved = th != 0.0 || shift.x != 0.0 || shift.y != 0.0;
    switch (impl_->model.kind) {
      case AsymModel::Kind::Vanishing:
      case AsymModel::Kind::None:
        break;
      case AsymModel::Kind::Halfplane:
        out.model.hp_normal = rot(impl_->model.hp_normal, th);
        out.model.hp_offset = s * impl_->model.hp_offset +
                              dot(out.model.hp_normal, shift);
        break;
      case AsymModel::Kind::Box:
        if (rigid_moved)
          out.model.kind = AsymModel::Kind::None;
        else
          out.model.box_r *= s;
        break;
      default:
        if (rigid_moved) out.model.kind = AsymModel::Kind::None;
        break;
    }
    double c = std::cos(-th), sn = std::sin(-th);
    out.inside = [self, s, c, sn, shift](Vec2 p) {
      Vec2 q = p - shift;
      Vec2 r{(c * q.x - sn * q.y) / s, (sn * q.x + c * q.y) / s};
      return self->inside(r);
    };
    if (impl_->distance_override) {
      auto d0 = impl_->distance_override;
      out.distance_override = [d0, s, c, sn, shift](Vec2 p) {
        Vec2 q = p - shift;
        Vec2 r{(c * q.x - sn * q.y) / s, (sn * q.x + c * q.y) / s};
        return s * d0(r);
      };
    }
    for (const auto& f : impl_->features)
      out.features.push_back(f.transformed(s, th, shift));
    for (const auto& cn : impl_->corners)
      out.corners.push_back({s * rot(cn.p, th) + shift, cn.sym});
    return make(std::move(out));
  }

  PlanarSet complemented() const {
    auto self = impl_;
    Impl out;
    out.name = "not(" + impl_->name + ")";
    out.exact = impl_->exact;
    out.ray_valid = impl_->ray_valid;
    out.unbounded = true;
    out.diameter = impl_->diameter;
    out.inside = [self](Vec2 p) { return !self->inside(p); };
    if (impl_->distance_override) {
      auto d0 = impl_->distance_override;
      out.distance_override = [d0](Vec2 p) { return -d0(p); };
    } else {
      auto base = *this;
      out.distance_override = [base](Vec2 p) { return -base.signed_distance(p); };
    }
    out.features = impl_->features;
    out.corners = impl_->corners;
    out.model = AsymModel{AsymModel::Kind::None};
    return make(std::move(out));
  }

  // {d_E >= lambda} (erode for lambda > 0) and {d_E >= -lambda} (dilate).
  // Distance is the shifted child distance: exact away from corner fillets.
  PlanarSet eroded(double lambda) const {
    auto base = *this;
    Impl out;
    out.name = impl_->name + "+erode";
    out.exact = false;
    out.unbounded = impl_->unbounded;
    out.diameter = impl_->diameter;
    out.model = impl_->model;
    out.inside = [base, lambda](Vec2 p) {
      return base.signed_distance(p) >= lambda;
    };
    out.distance_override = [base, lambda](Vec2 p) {
      return base.signed_distance(p) - lambda;
    };
    out.features = impl_->features;  // carriers only; offsets are in the distance
    out.ray_valid = false;
    return make(std::move(out));
  }
  PlanarSet dilated(double lambda) const { return eroded(-lambda); }

  static PlanarSet unite(const PlanarSet& a, const PlanarSet& b) {
    Impl out;
    out.name = "union(" + a.describe() + "," + b.describe() + ")";
    out.exact = false;
    out.ray_valid = a.ray_valid() && b.ray_valid();
    out.unbounded = a.unbounded() || b.unbounded();
    out.diameter = a.diameter_hint() + b.diameter_hint();
    out.inside = [a, b](Vec2 p) { return a.inside(p) || b.inside(p); };
    out.distance_override = [a, b](Vec2 p) {
      return std::max(a.signed_distance(p), b.signed_distance(p));
    };
    out.features = a.boundary();
    out.features.insert(out.features.end(), b.boundary().begin(), b.boundary().end());
    out.corners = a.corners();
    out.corners.insert(out.corners.end(), b.corners().begin(), b.corners().end());
    return make(std::move(out));
  }

  static PlanarSet intersect(const PlanarSet& a, const PlanarSet& b) {
    Impl out;
    out.name = "inter(" + a.describe() + "," + b.describe() + ")";
    out.exact = false;
    out.ray_valid = a.ray_valid() && b.ray_valid();
    out.unbounded = a.unbounded() && b.unbounded();
    out.diameter = std::min(a.diameter_hint(), b.diameter_hint());
    out.inside = [a, b](Vec2 p) { return a.inside(p) && b.inside(p); };
    out.distance_override = [a, b](Vec2 p) {
      return std::min(a.signed_distance(p), b.signed_distance(p));
    };
    out.features = a.boundary();
    out.features.insert(out.features.end(), b.boundary().begin(), b.boundary().end());
    out.corners = a.corners();
    out.corners.insert(out.corners.end(), b.corners().begin(), b.corners().end());
    return make(std::move(out));
  }

  double scale() const { return std::max(1.0, impl_->diameter); }

  struct Impl {
    std::function<bool(Vec2)> inside;
    std::function<double(Vec2)> distance_override;  // set for combos/offsets
    std::vector<Feature> features;
    std::vector<CornerInfo> corners;
    bool exact = true;
    bool ray_valid = true;
    bool unbounded = false;
    double diameter = 2.0;
    AsymModel model;
    std::string name = "set";
  };
  static PlanarSet make(Impl&& im) {
    PlanarSet s;
    s.impl_ = std::make_shared<const Impl>(std::move(im));
    return s;
  }

 private:
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// named constructions

namespace shapes {

inline PlanarSet plane() {
  PlanarSet::Impl im;
  im.name = "plane";
  im.inside = [](Vec2) { return true; };
  im.distance_override = [](Vec2) { return std::numeric_limits<double>::infinity(); };
  im.unbounded = true;
  im.model.kind = AsymModel::Kind::None;
  return PlanarSet::make(std::move(im));
}

inline PlanarSet ball(Vec2 c, double R) {
  if (!(R > 0)) throw error("ball: radius must be positive");
  PlanarSet::Impl im;
  im.name = "ball";
  im.inside = [c, R](Vec2 p) { return norm(p - c) <= R; };
  im.features = {Feature::circle(c, R)};
  im.diameter = 2.0 * R;
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// {x : n . x <= c}, n unit
inline PlanarSet halfplane(Vec2 n, double c) {
  Vec2 nu = unit(n);
  PlanarSet::Impl im;
  im.name = "halfplane";
  im.inside = [nu, c](Vec2 p) { return dot(nu, p) <= c; };
  im.features = {Feature::line(c * nu, perp(nu))};
  im.unbounded = true;
  im.diameter = 16.0;
  im.model.kind = AsymModel::Kind::Halfplane;
  im.model.hp_normal = nu;
  im.model.hp_offset = c;
  return PlanarSet::make(std::move(im));
}

// the cross {|x1| >= |x2|}
inline PlanarSet cross_axis() {
  PlanarSet::Impl im;
  im.name = "cross";
  im.inside = [](Vec2 p) { return std::abs(p.x) >= std::abs(p.y); };
  im.features = {Feature::line({0, 0}, unit({1, 1})),
                 Feature::line({0, 0}, unit({1, -1}))};
  im.corners = {{{0, 0}, CornerSym::OddZero}};
  im.unbounded = true;
  im.diameter = 16.0;
  im.model.kind = AsymModel::Kind::CrossAxis;
  return PlanarSet::make(std::move(im));
}

// the rotated frame {x1 x2 >= 0}
inline PlanarSet cross_rotated() {
  PlanarSet::Impl im;
  im.name = "cross-rotated";
  im.inside = [](Vec2 p) { return p.x * p.y >= 0.0; };
  im.features = {Feature::line({0, 0}, {1, 0}), Feature::line({0, 0}, {0, 1})};
  im.corners = {{{0, 0}, CornerSym::OddZero}};
  im.unbounded = true;
  im.diameter = 16.0;
  im.model.kind = AsymModel::Kind::CrossRotated;
  return PlanarSet::make(std::move(im));
}

// C_r^lambda: the perturbed cross C_r = [-r,r]^2 U cross dilated by lambda
// (lambda = 0 gives C_r itself).  Axis frame.
inline PlanarSet perturbed_cross_offset(double r, double lambda) {
  if (!(r > 0)) throw error("perturbed_cross: r must be positive");
  if (!(lambda >= 0 && lambda < 0.5 * r))
    throw error("perturbed_cross offset: need lambda in [0, r/2)");
  const double s2 = std::sqrt(2.0);
  const double e = r + lambda;             // horizontal edge offset
  const double xc = r - (s2 - 1.0) * lambda;  // corner abscissa
  PlanarSet::Impl im;
  im.name = lambda == 0 ? "perturbed-cross" : "perturbed-cross-dilated";
  im.inside = [r, lambda, s2](Vec2 p) {
    double ax = std::abs(p.x), ay = std::abs(p.y);
    if (ax >= ay - s2 * lambda) return true;  // dilated cross
    double dx = std::max(ax - r, 0.0), dy = std::max(ay - r, 0.0);
    return dx * dx + dy * dy <= lambda * lambda;  // dilated square
  };
  im.features = {
      Feature::segment({-xc, e}, {xc, e}),
      Feature::segment({-xc, -e}, {xc, -e}),
      Feature::half_line({xc, e}, unit({1, 1})),
      Feature::half_line({-xc, e}, unit({-1, 1})),
      Feature::half_line({xc, -e}, unit({1, -1})),
      Feature::half_line({-xc, -e}, unit({-1, -1})),
  };
  im.corners = {{{xc, e}}, {{-xc, e}}, {{xc, -e}}, {{-xc, -e}}};
  im.unbounded = true;
  im.diameter = 16.0;
  im.model.kind = AsymModel::Kind::CrossAxis;
  return PlanarSet::make(std::move(im));
}

inline PlanarSet perturbed_cross(double r) { return perturbed_cross_offset(r, 0.0); }

// C^r = (R^2 \ cross) U [-r,r]^2: the perturbed cross of the complementary cone
inline PlanarSet complement_cross_square(double r) {
  return perturbed_cross(r).rotated(0.5 * pi);
}

// N_r (rotated frame): [r,inf)^2 U (-inf,-r]^2
inline PlanarSet box_pair(double r) {
  if (!(r > 0)) throw error("box_pair: r must be positive");
  PlanarSet::Impl im;
  im.name = "box-pair";
  im.inside = [r](Vec2 p) {
    return (p.x >= r && p.y >= r) || (p.x <= -r && p.y <= -r);
  };
  im.features = {
      Feature::half_line({r, r}, {0, 1}), Feature::half_line({r, r}, {1, 0}),
      Feature::half_line({-r, -r}, {0, -1}),
      Feature::half_line({-r, -r}, {-1, 0})};
  im.corners = {{{r, r}}, {{-r, -r}}};
  im.unbounded = true;
  im.diameter = 16.0;
  im.model.kind = AsymModel::Kind::Box;
  im.model.box_r = r;
  return PlanarSet::make(std::move(im));
}

// N^r: the reflected pair in the second/fourth quadrants
inline PlanarSet box_pair_rotated(double r) {
  PlanarSet s = box_pair(r).rotated(0.5 * pi);
  return s;
}

// N_r^lambda = {d_{N_r} >= -lambda}: dilation by lambda in (0, r); the
// quadrant corners pick up fillet arcs of radius lambda.  M_r is lambda = r/2.
inline PlanarSet box_pair_dilated(double r, double lambda) {
  if (!(r > 0) || !(lambda > 0) || !(lambda < r))
    throw error("box_pair_dilated: need 0 < lambda < r");
  PlanarSet::Impl im;
  im.name = "box-pair-dilated";
  im.inside = [r, lambda](Vec2 p) {
    auto q = [&](double sx, double sy) {
      double dx = std::max(r - sx * p.x, 0.0);
      double dy = std::max(r - sy * p.y, 0.0);
      return std::hypot(dx, dy);
    };
    return q(1, 1) <= lambda || q(-1, -1) <= lambda;
  };
  double e = r - lambda;
  im.features = {
      Feature::half_line({e, r}, {0, 1}),
      Feature::half_line({r, e}, {1, 0}),
      Feature::arc({r, r}, lambda, pi, 1.5 * pi),
      Feature::half_line({-e, -r}, {0, -1}),
      Feature::half_line({-r, -e}, {-1, 0}),
      Feature::arc({-r, -r}, lambda, 0.0, 0.5 * pi),
  };
  im.unbounded = true;
  im.diameter = 16.0;
  im.model.kind = AsymModel::Kind::Box;
  im.model.box_r = r - lambda;  // straight edges sit at this offset
  return PlanarSet::make(std::move(im));
}

namespace detail_hull {

struct HullGeom {
  Vec2 center;
  double R;
  Vec2 Tp, Tm;     // tangency points (CCW order: Tp at a0 end of the arc)
  double a0, a1;   // exposed arc angles
};

inline HullGeom tangent_hull(Vec2 c, double R) {
  double d = norm(c);
  if (!(d > R)) throw error("hull: apex must be outside the disk");
  double phi = std::atan2(c.y, c.x);
  double beta = std::acos(R / d);
  double ap = phi + pi - beta;  // tangency angles as seen from the center
  double am = phi + pi + beta;
  HullGeom g;
  g.center = c;
  g.R = R;
  g.Tp = c + R * Vec2{std::cos(ap), std::sin(ap)};
  g.Tm = c + R * Vec2{std::cos(am), std::sin(am)};
  g.a0 = am;           // exposed major arc runs CCW from am around to ap
  g.a1 = ap + 2.0 * pi;
  return g;
}

inline bool in_tangent_hull(Vec2 c, double R, Vec2 p) {
  if (norm(p - c) <= R) return true;
  HullGeom g = tangent_hull(c, R);
  // triangle (0, Tp, Tm)
  auto side = [](Vec2 a, Vec2 b, Vec2 q) { return cross(b - a, q - a); };
  double s1 = side({0, 0}, g.Tp, p);
  double s2 = side(g.Tp, g.Tm, p);
  double s3 = side(g.Tm, {0, 0}, p);
  bool all_nonneg = s1 >= 0 && s2 >= 0 && s3 >= 0;
  bool all_nonpos = s1 <= 0 && s2 <= 0 && s3 <= 0;
  return all_nonneg || all_nonpos;
}

}  // namespace detail_hull

// convex hull of B_R(c) and the origin
inline PlanarSet droplet_lobe(Vec2 c, double R) {
  auto g = detail_hull::tangent_hull(c, R);
  PlanarSet::Impl im;
  im.name = "droplet-lobe";
  im.inside = [c, R](Vec2 p) { return detail_hull::in_tangent_hull(c, R, p); };
  im.features = {Feature::segment({0, 0}, g.Tp), Feature::segment({0, 0}, g.Tm),
                 Feature::arc(c, R, g.a0, g.a1)};
  im.corners = {{{0, 0}}};
  im.diameter = norm(c) + R;
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// the double droplet G of the introduction: hulls of B_1(-1,1) and B_1(1,-1)
inline PlanarSet droplet() {
  auto gp = detail_hull::tangent_hull({-1, 1}, 1.0);
  auto gm = detail_hull::tangent_hull({1, -1}, 1.0);
  PlanarSet::Impl im;
  im.name = "droplet";
  im.inside = [](Vec2 p) {
    return detail_hull::in_tangent_hull({-1, 1}, 1.0, p) ||
           detail_hull::in_tangent_hull({1, -1}, 1.0, p);
  };
  im.features = {Feature::segment({0, 0}, gp.Tp), Feature::segment({0, 0}, gp.Tm),
                 Feature::arc(gp.center, 1.0, gp.a0, gp.a1),
                 Feature::segment({0, 0}, gm.Tp), Feature::segment({0, 0}, gm.Tm),
                 Feature::arc(gm.center, 1.0, gm.a0, gm.a1)};
  im.corners = {{{0, 0}}};
  im.diameter = 2.0 * (std::sqrt(2.0) + 1.0);
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// G_0 in the horizontal frame: hulls of B_1((+-sqrt2, 0)) with the origin
inline PlanarSet droplet_axis() {
  double s2 = std::sqrt(2.0);
  auto gp = detail_hull::tangent_hull({s2, 0}, 1.0);
  auto gm = detail_hull::tangent_hull({-s2, 0}, 1.0);
  PlanarSet::Impl im;
  im.name = "droplet-axis";
  im.inside = [s2](Vec2 p) {
    return detail_hull::in_tangent_hull({s2, 0}, 1.0, p) ||
           detail_hull::in_tangent_hull({-s2, 0}, 1.0, p);
  };
  im.features = {Feature::segment({0, 0}, gp.Tp), Feature::segment({0, 0}, gp.Tm),
                 Feature::arc(gp.center, 1.0, gp.a0, gp.a1),
                 Feature::segment({0, 0}, gm.Tp), Feature::segment({0, 0}, gm.Tm),
                 Feature::arc(gm.center, 1.0, gm.a0, gm.a1)};
  im.corners = {{{0, 0}}};
  im.diameter = 2.0 * (s2 + 1.0);
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// pinched droplet G_{delta,r}: rectangle [-2r,2r]x[-r,r] plus the hulls of
// the shrunken disks B_{1-delta}((+-sqrt2, 0)); delta = 0 with the square
// [-r,r]^2 degenerates to G_r.
inline PlanarSet pinched_droplet(double delta, double r) {
  if (!(r > 0 && r < 0.5)) throw error("pinched_droplet: need r in (0, 1/2)");
  if (!(delta >= 0 && delta < r)) throw error("pinched_droplet: need delta in [0, r)");
  double s2 = std::sqrt(2.0);
  double R = 1.0 - delta;
  auto gp = detail_hull::tangent_hull({s2, 0}, R);
  auto gm = detail_hull::tangent_hull({-s2, 0}, R);
  // slope of the upper tangent line of the right hull
  double m = R / std::sqrt(2.0 - R * R);
  double xs = r / m;  // waist corner abscissa
  double halfw = delta == 0.0 ? r : 2.0 * r;
  if (xs >= halfw && delta > 0.0)
    throw error("pinched_droplet: waist corner escapes the rectangle");
  PlanarSet::Impl im;
  im.name = delta == 0.0 ? "droplet-square" : "pinched-droplet";
  im.inside = [s2, R, r, halfw](Vec2 p) {
    bool rect = std::abs(p.x) <= halfw && std::abs(p.y) <= r;
    return rect || detail_hull::in_tangent_hull({s2, 0}, R, p) ||
           detail_hull::in_tangent_hull({-s2, 0}, R, p);
  };
  Vec2 cpp{xs, r}, cpm{xs, -r}, cmp{-xs, r}, cmm{-xs, -r};
  im.features = {
      Feature::segment(cmp, cpp),               // waist top
      Feature::segment(cmm, cpm),               // waist bottom
      Feature::segment(cpp, gp.Tp),             // right upper tangent
      Feature::segment(cpm, gp.Tm),             // right lower tangent
      Feature::arc(gp.center, R, gp.a0, gp.a1),
      Feature::segment(cmp, gm.Tm),             // left upper tangent
      Feature::segment(cmm, gm.Tp),             // left lower tangent
      Feature::arc(gm.center, R, gm.a0, gm.a1),
  };
  im.corners = {{cpp}, {cpm}, {cmp}, {cmm}};
  im.diameter = 2.0 * (s2 + 1.0);
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

inline PlanarSet droplet_square(double r) { return pinched_droplet(0.0, r); }

// two tangent balls O = B_1(-1,0) U B_1(1,0)
inline PlanarSet tangent_balls() {
  PlanarSet::Impl im;
  im.name = "tangent-balls";
  im.inside = [](Vec2 p) {
    return norm(p - Vec2{-1, 0}) <= 1.0 || norm(p - Vec2{1, 0}) <= 1.0;
  };
  im.features = {Feature::circle({-1, 0}, 1.0), Feature::circle({1, 0}, 1.0)};
  im.corners = {{{0, 0}}};  // cusp: no declared symmetry, rejected pointwise
  im.diameter = 4.0;
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// Z_{delta,r} = B_r((1+delta) r, 0) U B_r(-(1+delta) r, 0), delta in [0, 1/8]
inline PlanarSet near_tangent(double delta, double r) {
  if (!(delta >= 0.0 && delta <= 0.125))
    throw error("near_tangent: need delta in [0, 1/8]");
  if (!(r > 0)) throw error("near_tangent: r must be positive");
  Vec2 cp{(1.0 + delta) * r, 0.0}, cm{-(1.0 + delta) * r, 0.0};
  PlanarSet::Impl im;
  im.name = "near-tangent";
  im.inside = [cp, cm, r](Vec2 p) {
    return norm(p - cp) <= r || norm(p - cm) <= r;
  };
  im.features = {Feature::circle(cp, r), Feature::circle(cm, r)};
  if (delta == 0.0) im.corners = {{{0, 0}}};
  im.diameter = 2.0 * r * (2.0 + delta);
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// two disjoint balls of radius R centered at (+-cx, 0), the barrier pair
inline PlanarSet two_balls(double cx, double R) {
  if (!(cx > R)) throw error("two_balls: balls must be disjoint");
  Vec2 cp{cx, 0}, cm{-cx, 0};
  PlanarSet::Impl im;
  im.name = "two-balls";
  im.inside = [cp, cm, R](Vec2 p) {
    return norm(p - cp) <= R || norm(p - cm) <= R;
  };
  im.features = {Feature::circle(cp, R), Feature::circle(cm, R)};
  im.diameter = 2.0 * (cx + R);
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// stadium: hull of B_R((-a,0)) and B_R((a,0)); C^{1,1}, convex
inline PlanarSet capsule(double a, double R) {
  if (!(a > 0 && R > 0)) throw error("capsule: bad parameters");
  PlanarSet::Impl im;
  im.name = "capsule";
  im.inside = [a, R](Vec2 p) {
    double t = std::clamp(p.x, -a, a);
    return norm(p - Vec2{t, 0}) <= R;
  };
  im.features = {
      Feature::segment({-a, R}, {a, R}),
      Feature::segment({-a, -R}, {a, -R}),
      Feature::arc({a, 0}, R, -0.5 * pi, 0.5 * pi),
      Feature::arc({-a, 0}, R, 0.5 * pi, 1.5 * pi),
  };
  im.distance_override = [a, R](Vec2 p) {
    double t = std::clamp(p.x, -a, a);
    return R - norm(p - Vec2{t, 0});
  };
  im.exact = true;
  im.diameter = 2.0 * (a + R);
  im.model.kind = AsymModel::Kind::Vanishing;
  return PlanarSet::make(std::move(im));
}

// offset capsule is a capsule: exact dilation for the barrier family
inline PlanarSet capsule_offset(double a, double R, double lambda) {
  if (!(R + lambda > 0)) throw error("capsule_offset: eroded away");
  return capsule(a, R + lambda);
}

}  // namespace shapes

// ---------------------------------------------------------------------------
// boundary sampling

inline std::vector<BoundarySample> boundary_sample(const PlanarSet& E,
                                                   double spacing,
                                                   std::optional<Window> win = {}) {
  if (!(spacing > 0)) throw error("boundary_sample: spacing must be positive");
  Window w = win.value_or(Window{});
  std::vector<BoundarySample> out;
  bool partial = false;
  auto probe_normal = [&](Vec2 p, Vec2 n_candidate) {
    double eps = 1e-7 * (1.0 + norm(p));
    Vec2 n = n_candidate;
    if (E.inside(p + eps * n) && !E.inside(p - eps * n)) n = -1.0 * n;
    return n;
  };
  double arc_acc = 0.0;
  for (const auto& f : E.boundary()) {
    double lo, hi;
    if (f.kind == Feature::Kind::Linear) {
      lo = f.t0;
      hi = f.t1;
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        // clip the carrier line against the window
        double tmin = -std::numeric_limits<double>::infinity();
        double tmax = std::numeric_limits<double>::infinity();
        auto clip = [&](double p0, double d, double a, double b) {
          if (std::abs(d) < 1e-300) return p0 >= a && p0 <= b;
          double u = (a - p0) / d, v = (b - p0) / d;
          if (u > v) std::swap(u, v);
          tmin = std::max(tmin, u);
          tmax = std::min(tmax, v);
          return true;
        };
        if (!clip(f.base.x, f.dir.x, w.x0, w.x1) ||
            !clip(f.base.y, f.dir.y, w.y0, w.y1))
          continue;
        lo = std::max(f.t0, tmin);
        hi = std::min(f.t1, tmax);
        partial = true;
        if (!(hi > lo)) continue;
      }
    } else {
      lo = f.a0;
      hi = f.a1;
    }
    double len = (f.kind == Feature::Kind::Linear) ? hi - lo : f.radius * (hi - lo);
    int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    bool full_circle =
        f.kind == Feature::Kind::Arc && hi - lo >= 2.0 * pi - 1e-12;
    for (int i = 0; i <= (full_circle ? n - 1 : n); ++i) {
      double t = lo + (hi - lo) * i / n;
      Vec2 p = f.point_at(t);
      if (!w.contains(p)) continue;
      // union/intersection carriers can dip into the partner's interior
      if (std::abs(E.signed_distance(p)) > 1e-9 * (1.0 + norm(p))) continue;
      BoundarySample s;
      s.point = p;
      if (f.kind == Feature::Kind::Linear) {
        s.normal = probe_normal(p, perp(f.dir));
      } else {
        s.normal = probe_normal(p, unit(p - f.center));
      }
      s.curvature_bound = f.curvature_bound();
      auto info = E.local_info(p);
      s.feature_size = info.feature_size;
      s.regularity = Regularity::Smooth;
      s.arclength = arc_acc + (f.kind == Feature::Kind::Linear
                                   ? t - lo
                                   : f.radius * (t - lo));
      s.partial_window = partial;
      // corner samples are emitted separately below
      bool at_corner = false;
      for (const auto& c : E.corners())
        if (norm(p - c.p) < 1e-12 * (1.0 + norm(p))) at_corner = true;
      if (!at_corner) out.push_back(s);
    }
    arc_acc += len;
  }
  for (const auto& c : E.corners()) {
    if (!w.contains(c.p)) continue;
    BoundarySample s;
    s.point = c.p;
    s.regularity = Regularity::Angular;
    // bisector direction from one-sided probes
    Vec2 acc{0, 0};
    for (const auto& f : E.boundary()) {
      if (f.distance(c.p) > 1e-9 * (1.0 + norm(c.p))) continue;
      Vec2 n = f.kind == Feature::Kind::Linear ? perp(f.dir)
                                               : unit(c.p - f.center);
      acc = acc + probe_normal(c.p + 1e-6 * perp(n), n);
    }
    s.normal = norm(acc) > 1e-12 ? unit(acc) : Vec2{1, 0};
    s.feature_size = 0.0;
    s.partial_window = partial;
    out.push_back(s);
  }
  return out;
}

// boundary-to-boundary distance within a window: exact candidates over
// feature pairs refined by alternating projection
inline double set_distance(const PlanarSet& E, const PlanarSet& F,
                           std::optional<Window> win = {}) {
  Window w = win.value_or(Window{});
  auto se = boundary_sample(E, 0.02 * std::max(w.width(), w.height()), w);
  auto sf = boundary_sample(F, 0.02 * std::max(w.width(), w.height()), w);
  if (se.empty() || sf.empty()) throw error("set_distance: empty boundary in window");
  double best = std::numeric_limits<double>::infinity();
  Vec2 bp{};
  for (const auto& a : se) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& f : F.boundary()) d = std::min(d, f.distance(a.point));
    if (d < best) {
      best = d;
      bp = a.point;
    }
  }
  // alternate projections from the best seed
  Vec2 p = bp;
  for (int it = 0; it < 60; ++it) {
    // project p to F, then back to E
    auto project = [&](const PlanarSet& S, Vec2 q) {
      double dmin = std::numeric_limits<double>::infinity();
      const Feature* bf = nullptr;
      for (const auto& f : S.boundary()) {
        double d = f.distance(q);
        if (d < dmin) {
          dmin = d;
          bf = &f;
        }
      }
      if (!bf) return q;
      if (bf->kind == Feature::Kind::Linear) {
        double t = std::clamp(dot(q - bf->base, bf->dir), bf->t0, bf->t1);
        return bf->base + t * bf->dir;
      }
      Vec2 v = q - bf->center;
      double ang = std::atan2(v.y, v.x);
      double a = ang;
      while (a < bf->a0) a += 2 * pi;
      while (a >= bf->a0 + 2 * pi) a -= 2 * pi;
      a = std::min(a, bf->a1);
      return bf->point_at(a);
    };
    Vec2 q = project(F, p);
    Vec2 pn = project(E, q);
    double d = norm(pn - q);
    if (d < best) best = d;
    if (norm(pn - p) < 1e-14 * (1 + norm(p))) break;
    p = pn;
  }
  return best;
}

}  // namespace nlcf
