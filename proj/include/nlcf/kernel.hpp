#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlcf/quadrature.hpp"

namespace nlcf {

namespace detail {

// ∫_a^b rho^p d rho
inline double powint(double a, double b, double p) {
  if (b <= a) return 0.0;
  if (std::abs(p + 1.0) < 1e-14) return std::log(b / a);
  return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
}

// Radial profile piece k0(rho) = amp * rho^p on [lo, hi)
struct RadialSegment {
  double lo, hi, amp, p;
};

}  // namespace detail

// Rotationally invariant interaction kernel K(x) = K0(|x|) on the plane.
// Profiles are piecewise power laws (fractional and piecewise kernels exactly,
// tabulated profiles via log-log interpolation), which keeps the radial
// primitives J(a) = ∫_a^∞ K0 rho d rho and the truncated moments in closed
// form. Immutable after construction; all queries are pure.
class Kernel {
 public:
  enum class Type { Fractional, PiecewisePower, Table };

  static Kernel fractional(double s) {
    if (!(s > 0.0 && s < 1.0)) throw error("fractional kernel needs s in (0,1)");
    Impl im;
    im.type = Type::Fractional;
    im.s = s;
    im.segs = {{0.0, inf(), 1.0, -2.0 - s}};
    im.nonincreasing = true;
    std::ostringstream os;
    os << "frac(s=" << s << ")";
    im.sig = os.str();
    return finish(std::move(im));
  }

  // K0(rho) = rho^{-alpha} for rho <= 1, rho^{-tail_exponent} beyond.
  static Kernel piecewise_power(double alpha, double tail_exponent) {
    if (!(alpha < 3.0)) throw error("piecewise kernel: near-field exponent must be < 3");
    if (!(tail_exponent > 2.0)) throw error("piecewise kernel: tail exponent must be > 2");
    Impl im;
    im.type = Type::PiecewisePower;
    im.alpha = alpha;
    im.tail_exponent = tail_exponent;
    im.segs = {{0.0, 1.0, 1.0, -alpha}, {1.0, inf(), 1.0, -tail_exponent}};
    im.nonincreasing = alpha >= 0.0 && tail_exponent >= 0.0;
    std::ostringstream os;
    os << "pw(a=" << alpha << ",t=" << tail_exponent << ")";
    im.sig = os.str();
    return finish(std::move(im));
  }

  // Tabulated radial profile, log-log interpolation between nodes, first
  // segment's power law extrapolated toward 0, zero beyond the last node.
  // Trailing zero samples truncate the support.
  static Kernel table(std::vector<double> rho, std::vector<double> k0) {
    if (rho.size() != k0.size() || rho.size() < 2)
      throw error("table kernel: need >= 2 (rho, k0) samples");
    for (std::size_t i = 0; i + 1 < rho.size(); ++i)
      if (!(rho[i] < rho[i + 1])) throw error("table kernel: rho must increase");
    for (double v : k0)
      if (v < 0.0 || !std::isfinite(v)) throw error("table kernel: negative or non-finite sample");
    Impl im;
    im.type = Type::Table;
    im.rho = rho;
    im.k0v = k0;
    std::size_t n = rho.size();
    // strip trailing zeros -> finite support at the first zero node
    std::size_t last = n;
    while (last > 0 && k0[last - 1] == 0.0) --last;
    if (last == 0) {  // identically zero profile
      im.segs = {};
      im.nonincreasing = true;
      im.sig = "table(zero)";
      return finish(std::move(im));
    }
    for (std::size_t i = 0; i + 1 < last; ++i) {
      if (k0[i] == 0.0 || k0[i + 1] == 0.0)
        throw error("table kernel: interior zeros not representable in log-log form");
      double p = std::log(k0[i + 1] / k0[i]) / std::log(rho[i + 1] / rho[i]);
      im.segs.push_back({rho[i], rho[i + 1], k0[i] / std::pow(rho[i], p), p});
    }
    // extrapolate the first power law toward 0
    if (!im.segs.empty()) {
      detail::RadialSegment head = im.segs.front();
      if (head.p <= -3.0)
        throw error("table kernel: near-field extrapolation not integrable");
      im.segs.insert(im.segs.begin(), {0.0, head.lo, head.amp, head.p});
    } else {
      // single positive node before trailing zeros: flat up to that node
      im.segs.push_back({0.0, rho[0], k0[0], 0.0});
    }
    im.support = rho[last - 1];
    im.nonincreasing = true;
    for (std::size_t i = 0; i < im.segs.size(); ++i) {
      if (im.segs[i].p > 1e-12) im.nonincreasing = false;
      if (i > 0) {
        double left = seg_eval(im.segs[i - 1], im.segs[i].lo);
        double right = seg_eval(im.segs[i], im.segs[i].lo);
        if (right > left * (1.0 + 1e-9)) im.nonincreasing = false;
      }
    }
    std::ostringstream os;
    os << "table(n=" << n << ",r0=" << rho[0] << ",r1=" << rho[n - 1] << ")";
    im.sig = os.str();
    return finish(std::move(im));
  }

  // K_delta = K (1 - chi_{B_delta}): near-field truncation, bounded at 0.
  Kernel regularized(double delta) const {
    if (!(delta > 0.0)) throw error("regularization radius must be positive");
    Impl im = *impl_;
    std::vector<detail::RadialSegment> segs;
    for (const auto& s : im.segs) {
      if (s.hi <= delta) continue;
      detail::RadialSegment t = s;
      t.lo = std::max(t.lo, delta);
      segs.push_back(t);
    }
    im.segs = std::move(segs);
    im.cutoff = delta;
    im.sig += "+cut(" + std::to_string(delta) + ")";
    auto out = std::make_shared<Impl>(std::move(im));
    Kernel k;
    k.impl_ = std::move(out);
    return k;
  }

  Kernel with_dominating_profile(const Kernel& k1) const {
    Impl im = *impl_;
    if (!k1.nonincreasing()) throw error("dominating profile K1 must be nonincreasing");
    im.k1 = std::make_shared<Kernel>(k1);
    auto out = std::make_shared<Impl>(std::move(im));
    Kernel k;
    k.impl_ = std::move(out);
    return k;
  }

  double k0(double rho) const {
    if (rho <= 0.0) return 0.0;
    for (const auto& s : impl_->segs)
      if (rho >= s.lo && rho < s.hi) return seg_eval(s, rho);
    return 0.0;
  }

  // J(a) = ∫_a^∞ K0(rho) rho d rho  (finite for every a > 0 by construction)
  double radial_tail(double a) const {
    double out = 0.0;
    for (const auto& s : impl_->segs) {
      double lo = std::max(s.lo, a);
      if (lo >= s.hi) continue;
      out += s.amp * detail::powint(lo, s.hi, s.p + 1.0);
    }
    return out;
  }

  double radial_mass(double a, double b) const {
    if (b <= a) return 0.0;
    double out = 0.0;
    for (const auto& s : impl_->segs) {
      double lo = std::max(s.lo, a), hi = std::min(s.hi, b);
      if (lo >= hi) continue;
      out += s.amp * detail::powint(lo, hi, s.p + 1.0);
    }
    return out;
  }

  // ∫_a^b rho^2 K0(rho) d rho, the near-field moment of (ROTAZION2)-type
  double second_moment(double a, double b) const {
    if (b <= a) return 0.0;
    double out = 0.0;
    for (const auto& s : impl_->segs) {
      double lo = std::max(s.lo, a), hi = std::min(s.hi, b);
      if (lo >= hi) continue;
      out += s.amp * detail::powint(lo, hi, s.p + 2.0);
    }
    return out;
  }

  double support_radius() const { return impl_->support; }
  bool nonincreasing() const { return impl_->nonincreasing; }
  bool is_zero() const { return impl_->segs.empty(); }
  double near_cutoff() const { return impl_->cutoff; }
  std::optional<double> fractional_s() const {
    if (impl_->type == Type::Fractional && impl_->cutoff == 0.0) return impl_->s;
    return std::nullopt;
  }
  Type type() const { return impl_->type; }
  double param_s() const { return impl_->s; }
  double param_alpha() const { return impl_->alpha; }
  double param_tail() const { return impl_->tail_exponent; }
  const std::vector<double>& table_rho() const { return impl_->rho; }
  const std::vector<double>& table_k0() const { return impl_->k0v; }
  const std::string& signature() const { return impl_->sig; }
  std::shared_ptr<Kernel> dominating_profile() const {
    if (impl_->k1) return impl_->k1;
    if (impl_->nonincreasing) return std::make_shared<Kernel>(*this);
    return nullptr;
  }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }
  static double seg_eval(const detail::RadialSegment& s, double rho) {
    return s.amp * std::pow(rho, s.p);
  }
  struct Impl {
    Type type = Type::Fractional;
    double s = 0.0, alpha = 0.0, tail_exponent = 0.0;
    double cutoff = 0.0;
    double support = std::numeric_limits<double>::infinity();
    bool nonincreasing = false;
    std::vector<detail::RadialSegment> segs;
    std::vector<double> rho, k0v;
    std::shared_ptr<Kernel> k1;
    std::string sig;
  };
  static Kernel finish(Impl&& im) {
    // analytic ROTAZION2 check on the closed-form segments
    if (!im.segs.empty()) {
      const auto& head = im.segs.front();
      if (head.lo == 0.0 && head.p <= -3.0)
        throw error("kernel fails integrability: rho^2 K0 not integrable at 0");
      const auto& last = im.segs.back();
      if (std::isinf(last.hi) && last.p >= -2.0)
        throw error("kernel fails integrability: rho K0 not integrable at infinity");
    }
    auto out = std::make_shared<Impl>(std::move(im));
    Kernel k;
    k.impl_ = std::move(out);
    return k;
  }
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// integrability report (numeric verification of (ROTAZION2), n = 2)

struct IntegrabilityReport {
  double near_field = 0.0;  // ∫_0^1 rho^2 K0
  double tail = 0.0;        // ∫_1^∞ rho K0
  bool near_diverges = false;
  bool tail_diverges = false;
  bool pass = false;
};

// numeric (ROTAZION2) verification for an arbitrary radial profile; used at
// construction and for free-form profiles that never become a valid Kernel
template <class Profile>
IntegrabilityReport check_integrability_profile(const Profile& k0, double rel = 1e-8) {
  IntegrabilityReport rep;
  ImproperOpts o;
  o.rel = rel;
  auto nearq = integrate_to_zero([&](double r) { return r * r * k0(r); }, 1.0, o);
  auto tailq = integrate_to_inf([&](double r) { return r * k0(r); }, 1.0, o);
  rep.near_field = nearq.value;
  rep.tail = tailq.value;
  rep.near_diverges = nearq.diverged;
  rep.tail_diverges = tailq.diverged;
  rep.pass = !nearq.diverged && !tailq.diverged && nearq.converged && tailq.converged;
  return rep;
}

inline IntegrabilityReport check_integrability(const Kernel& k, double rel = 1e-8) {
  return check_integrability_profile([&](double r) { return k.k0(r); }, rel);
}

struct KernelParams {
  // convenience factory used by make_kernel-style construction from specs
};

// mass of K over the complement of B_R
inline double tail_mass(const Kernel& k, double R) {
  if (!(R > 0.0)) throw error("tail_mass: R must be positive");
  return 2.0 * pi * k.radial_tail(R);
}

// ---------------------------------------------------------------------------
// radial-arc reductions of planar kernel masses

// mass of K over the disk B_r(d e1): 1D reduction over circle radii.
// Divergence (disk covering the origin of a strongly singular kernel) is
// reported as +inf.
inline double disk_mass(const Kernel& k, double d, double r, double rel = 1e-8) {
  if (k.is_zero()) return 0.0;
  double lo = std::max(0.0, d - r), hi = d + r;
  hi = std::min(hi, k.support_radius());
  if (hi <= lo) return 0.0;
  auto arc = [&](double rho) {
    if (d <= 0.0) return rho <= r ? 2.0 * pi : 0.0;
    double c = (rho * rho + d * d - r * r) / (2.0 * rho * d);
    return 2.0 * std::acos(std::clamp(c, -1.0, 1.0));
  };
  auto f = [&](double rho) { return arc(rho) * k.k0(rho) * rho; };
  double out = 0.0;
  if (lo == 0.0) {
    double split = std::min(hi, std::max(r - d, hi * 1e-3));
    ImproperOpts o;
    o.rel = rel;
    auto q = integrate_to_zero(f, split, o);
    if (q.diverged) return std::numeric_limits<double>::infinity();
    out += q.value;
    lo = split;
  }
  out += integrate(f, lo, hi, {rel, 0.0}).value;
  return out;
}

// Psi(r): kernel mass over B_{r/4}((7r/4, 0))
inline double psi(const Kernel& k, double r, double rel = 1e-8) {
  if (!(r > 0.0)) throw error("psi: r must be positive");
  return disk_mass(k, 1.75 * r, 0.25 * r, rel);
}

// Phi(r): mass of the dominating profile K1 over the strip [-r, r] x R.
struct PhiResult {
  double value = 0.0;
  double error = 0.0;
  bool finite = false;
};

inline PhiResult phi(const Kernel& k, double r, double rel = 1e-8) {
  if (!(r > 0.0)) throw error("phi: r must be positive");
  auto k1p = k.dominating_profile();
  if (!k1p) throw error("phi: no nonincreasing dominating profile available");
  const Kernel& k1 = *k1p;
  if (k1.is_zero()) return {0.0, 0.0, true};
  PhiResult out;
  // angular reduction: full circles inside B_r, arcs 4 asin(r/rho) beyond;
  // divergence can only come from the near field
  ImproperOpts o;
  o.rel = rel;
  auto nearq = integrate_to_zero([&](double rho) { return 2.0 * pi * k1.k0(rho) * rho; },
                                 std::min(r, k1.support_radius()), o);
  if (nearq.diverged) return {0.0, 0.0, false};
  out.value += nearq.value;
  out.error += nearq.error;
  double hi = k1.support_radius();
  auto f = [&](double rho) { return 4.0 * std::asin(std::clamp(r / rho, 0.0, 1.0)) * k1.k0(rho) * rho; };
  // the asin plateau can extend over many octaves; integrate it on a finite
  // interval and leave the dyadic driver for the genuinely decaying tail
  double mid_hi = std::min(hi, std::max(1.0, 2.0 * r));
  if (mid_hi > r) {
    auto q = integrate(f, r, mid_hi, {rel, 0.0, 40000});
    out.value += q.value;
    out.error += q.error;
  }
  if (std::isinf(hi)) {
    auto tailq = integrate_to_inf(f, mid_hi, o);
    if (tailq.diverged) return {0.0, 0.0, false};
    out.value += tailq.value;
    out.error += tailq.error;
  } else if (hi > mid_hi) {
    auto q = integrate(f, mid_hi, hi, {rel, 0.0});
    out.value += q.value;
    out.error += q.error;
  }
  out.finite = true;
  return out;
}

// ---------------------------------------------------------------------------
// Lambda(r) = ∫_0^r d rho / Psi(rho) and its inverse r(t) (strong regime)

class LambdaTable {
 public:
  LambdaTable(Kernel k, double r_max = 4.0, double rel = 1e-8)
      : k_(std::move(k)), r_max_(r_max) {
    // geometric grid of Psi values, quarter-octave, frozen after build
    const double ratio = std::pow(2.0, 0.25);
    double r = r_max_;
    std::vector<double> rs, psis;
    for (int i = 0; i < 4 * 80 && r > 1e-60; ++i) {
      rs.push_back(r);
      psis.push_back(psi(k_, r, rel));
      r /= ratio;
    }
    std::reverse(rs.begin(), rs.end());
    std::reverse(psis.begin(), psis.end());
    // cumulative ∫ d rho / Psi from 0, segment-wise closed form on the
    // log-log interpolant; detect the weak regime (divergent near 0)
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (!(psis[i] > 0.0))
        throw error("lambda: Psi vanishes on (0, r_max); kernel has no strong-regime mass");
    rs_ = rs;
    inv_psi_amp_.resize(rs.size() - 1);
    inv_psi_p_.resize(rs.size() - 1);
    for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
      double p = std::log(psis[i + 1] / psis[i]) / std::log(rs[i + 1] / rs[i]);
      inv_psi_p_[i] = -p;
      inv_psi_amp_[i] = std::pow(rs[i], p) / psis[i];
    }
    // head: extrapolate the first interpolation exponent toward 0
    double p0 = inv_psi_p_.empty() ? 0.0 : inv_psi_p_[0];
    if (p0 <= -1.0)
      throw error("lambda: weak regime, ∫ d rho/Psi diverges at 0");
    head_ = inv_psi_amp_.empty() ? 0.0
                                 : inv_psi_amp_[0] * detail::powint(0.0, rs[0], p0);
    cum_.resize(rs.size());
    cum_[0] = head_;
    for (std::size_t i = 0; i + 1 < rs.size(); ++i)
      cum_[i + 1] = cum_[i] + inv_psi_amp_[i] * detail::powint(rs[i], rs[i + 1], inv_psi_p_[i]);
  }

  double r_max() const { return r_max_; }

  double lambda(double r) const {
    if (!(r >= 0.0)) throw error("lambda: r must be nonnegative");
    if (r == 0.0) return 0.0;
    if (r > r_max_ * (1.0 + 1e-12))
      throw error("lambda: r beyond tabulated range");
    auto it = std::upper_bound(rs_.begin(), rs_.end(), r);
    if (it == rs_.begin()) {
      double p0 = inv_psi_p_.empty() ? 0.0 : inv_psi_p_[0];
      double a0 = inv_psi_amp_.empty() ? 0.0 : inv_psi_amp_[0];
      return a0 * detail::powint(0.0, r, p0);
    }
    std::size_t i = static_cast<std::size_t>(it - rs_.begin()) - 1;
    if (i + 1 >= rs_.size()) return cum_.back();
    return cum_[i] + inv_psi_amp_[i] * detail::powint(rs_[i], r, inv_psi_p_[i]);
  }

  // unique r with Lambda(r) = t, by bisection on the monotone table
  double invert(double t) const {
    if (!(t >= 0.0)) throw error("invert_lambda: t must be nonnegative");
    if (t == 0.0) return 0.0;
    if (t > cum_.back())
      throw error("invert_lambda: t beyond tabulated Lambda range; rebuild with larger r_max");
    double lo = 0.0, hi = r_max_;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * r_max_; ++i) {
      double mid = 0.5 * (lo + hi);
      (lambda(mid) < t ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  Kernel k_;
  double r_max_;
  double head_ = 0.0;
  std::vector<double> rs_, cum_, inv_psi_amp_, inv_psi_p_;
};

inline double lambda_of(const Kernel& k, double r, double rel = 1e-8) {
  return LambdaTable(k, r, rel).lambda(r);
}

// ---------------------------------------------------------------------------
// regime classification (heuristic numeric convergence tests)

enum class Regime { Strong, Weak, Undetermined };

struct RegimeReport {
  Regime verdict = Regime::Undetermined;
  bool kersi_converges = false;     // ∫_0^1 d rho / Psi < ∞
  bool hig_diverges = false;        // ∫_δ^1 d tau / Phi -> ∞
  bool phi_finite = false;
  double unimpiu_inf = 0.0;         // sampled infimum of the (UNIMPIU) mass
  bool unimpiu_positive = false;
};

inline RegimeReport classify_regime_report(const Kernel& k) {
  RegimeReport rep;
  if (k.is_zero()) return rep;
  // KERSI via dyadic panels of 1/Psi toward 0
  {
    ImproperOpts o;
    o.rel = 1e-5;
    o.max_levels = 60;
    bool psi_failed = false;
    auto q = integrate_to_zero(
        [&](double rho) {
          double v = psi(k, rho, 1e-6);
          if (!(v > 0.0)) {
            psi_failed = true;
            return 0.0;
          }
          return 1.0 / v;
        },
        1.0, o);
    rep.kersi_converges = q.converged && !q.diverged && !psi_failed;
  }
  // UNIMPIU positivity at sampled radii: inf over p in B_{3 sqrt2 r} of the
  // mass of B_{r/4}((3r/4,0)) - p, radialized to a center-distance scan.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (double r : {0.4, 0.2, 0.1, 0.05, 0.025}) {
      double dmax = 0.75 * r + 3.0 * std::sqrt(2.0) * r;
      double m = std::numeric_limits<double>::infinity();
      for (int i = 0; i <= 16; ++i) {
        double d = dmax * i / 16.0;
        m = std::min(m, disk_mass(k, d, 0.25 * r, 1e-6));
      }
      worst = std::min(worst, m);
    }
    rep.unimpiu_inf = worst;
    rep.unimpiu_positive = worst > 0.0;
  }
  if (rep.kersi_converges && rep.unimpiu_positive) {
    rep.verdict = Regime::Strong;
    return rep;
  }
  // weak regime: Phi finite with admissible K1, HIG integral divergent
  if (k.dominating_profile()) {
    auto p1 = phi(k, 1.0, 1e-6);
    rep.phi_finite = p1.finite;
    if (p1.finite) {
      ImproperOpts o;
      o.rel = 1e-5;
      o.max_levels = 120;
      auto q = integrate_to_zero(
          [&](double tau) {
            auto pr = phi(k, tau, 1e-6);
            return pr.finite && pr.value > 0.0 ? 1.0 / pr.value : 0.0;
          },
          1.0, o);
      rep.hig_diverges = q.diverged;
      if (q.diverged) {
        rep.verdict = Regime::Weak;
        return rep;
      }
    }
  }
  rep.verdict = Regime::Undetermined;
  return rep;
}

inline Regime classify_regime(const Kernel& k) { return classify_regime_report(k).verdict; }

// ---------------------------------------------------------------------------
// ball curvature c(R) and the radius ODE

// PV K-curvature of B_R at a boundary point, via paired rays: opposite rays
// cancel exactly below the chord, leaving c(R) = 4 ∫_0^{pi/2} J(2R cos t) dt.
inline double ball_curvature(const Kernel& k, double R, double rel = 1e-9) {
  if (!(R > 0.0)) throw error("ball_curvature: R must be positive");
  if (k.is_zero()) return 0.0;
  auto f = [&](double t) { return k.radial_tail(2.0 * R * std::cos(t)); };
  QuadTol tol{rel, 0.0, 60000};
  auto q = integrate(f, 0.0, 0.5 * pi, tol);
  return 4.0 * q.value;
}

struct BallTrajectory {
  std::vector<std::pair<double, double>> radii;  // (t, R(t))
  double extinction_time = 0.0;
  std::map<double, double> c_of_R;  // memoized curvature samples
};

struct BallStepControl {
  double rel = 1e-7;        // local ODE tolerance (per step, step-doubling)
  double floor_factor = 1e-3;  // extrapolation floor R0 * floor_factor
  double record_dt = 0.0;   // 0: record every accepted step
};

namespace detail {

class CurvatureMemo {
 public:
  CurvatureMemo(const Kernel& k) : k_(k) {}
  double operator()(double R) {
    // log-interpolate between cached evaluations when the gap is tight
    auto hi = memo_.lower_bound(R);
    if (hi != memo_.end() && hi != memo_.begin()) {
      auto lo = std::prev(hi);
      if (hi->first / lo->first < 1.02) {
        double t = std::log(R / lo->first) / std::log(hi->first / lo->first);
        return lo->second * std::pow(hi->second / lo->second, t);
      }
    }
    double v = ball_curvature(k_, R, 1e-9);
    memo_[R] = v;
    return v;
  }
  const std::map<double, double>& table() const { return memo_; }

 private:
  const Kernel& k_;
  std::map<double, double> memo_;
};

}  // namespace detail

inline BallTrajectory ball_evolution(const Kernel& k, double R0,
                                     BallStepControl ctrl = {}) {
  if (!(R0 > 0.0)) throw error("ball_evolution: R0 must be positive");
  BallTrajectory out;
  detail::CurvatureMemo c(k);
  if (k.is_zero()) throw error("ball_evolution: zero kernel never extinguishes");
  const double floor = R0 * ctrl.floor_factor;
  double t = 0.0, R = R0;
  out.radii.push_back({t, R});
  double dt = 0.1 * R0 / c(R0);
  auto rk4 = [&](double r, double h) {
    double k1 = -c(r);
    double k2 = -c(std::max(r + 0.5 * h * k1, 0.5 * floor));
    double k3 = -c(std::max(r + 0.5 * h * k2, 0.5 * floor));
    double k4 = -c(std::max(r + h * k3, 0.5 * floor));
    return r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  double next_record = ctrl.record_dt;
  while (R > floor) {
    // keep steps well inside the remaining radius
    dt = std::min(dt, 0.2 * (R - 0.5 * floor) / c(R));
    double full = rk4(R, dt);
    double half = rk4(rk4(R, 0.5 * dt), 0.5 * dt);
    double err = std::abs(full - half);
    double scale = std::max(ctrl.rel * R, 1e-300);
    if (err > scale && dt > 1e-14 * R0) {
      dt *= 0.5;
      continue;
    }
    R = half;
    t += dt;
    if (err < 0.1 * scale) dt *= 1.6;
    if (ctrl.record_dt <= 0.0 || t >= next_record || R <= floor) {
      out.radii.push_back({t, std::max(R, 0.0)});
      next_record += ctrl.record_dt;
    }
  }
  // local power-law extrapolation below the floor: c(R) ~ c_f (R/R_f)^{-p}
  double Rf = std::max(R, 0.5 * floor);
  double cf = c(Rf);
  double R2 = 2.0 * Rf;
  double p = std::log(c(R2) / cf) / std::log(Rf / R2);  // c ~ R^{-p}
  double rest = (p > -1.0) ? Rf / (cf * (1.0 + p)) : Rf / cf;
  out.extinction_time = t + rest;
  out.radii.push_back({out.extinction_time, 0.0});
  out.c_of_R = c.table();
  return out;
}

// C(R) = ∫_1^R ds / c(s) of the implicit ball clock
inline double ball_clock(const Kernel& k, double R, double rel = 1e-8) {
  if (!(R > 0.0)) throw error("ball_clock: R must be positive");
  detail::CurvatureMemo c(k);
  double lo = std::min(1.0, R), hi = std::max(1.0, R);
  auto q = integrate([&](double s) { return 1.0 / c(s); }, lo, hi, {rel, 0.0});
  return R >= 1.0 ? q.value : -q.value;
}

}  // namespace nlcf
