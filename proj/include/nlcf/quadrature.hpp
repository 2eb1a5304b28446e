#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace nlcf {

inline constexpr double pi = 3.14159265358979323846;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive quadrature backbone: fixed-order Gauss-Legendre rule per panel,
// two-level error estimate (parent vs. bisected children), global worst-first
// refinement. Default tolerances: rel 1e-6 for 1D, 1e-4 for 2D.
struct QuadTol {
  double rel = 1e-6;
  double abs = 0.0;
  std::size_t max_panels = 20000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated two-level estimate
  bool converged = false;
  bool diverged = false;  // set by the improper-integral drivers only
};

namespace detail {

// 7-point Gauss-Legendre on [-1,1]
inline constexpr double gl7_x[7] = {
    -0.9491079123427585245262, -0.7415311855993944398639,
    -0.4058451513773971669066, 0.0,
    0.4058451513773971669066,  0.7415311855993944398639,
    0.9491079123427585245262};
inline constexpr double gl7_w[7] = {
    0.1294849661688696932706, 0.2797053914892766679015,
    0.3818300505051189449504, 0.4179591836734693877551,
    0.3818300505051189449504, 0.2797053914892766679015,
    0.1294849661688696932706};

template <class F>
double gl7(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 7; ++i) s += gl7_w[i] * f(c + h * gl7_x[i]);
  return s * h;
}

struct Panel {
  double a, b, value, err;
  bool operator<(const Panel& o) const {
    if (err != o.err) return err < o.err;
    return a > o.a;  // deterministic tie-break
  }
};

}  // namespace detail

template <class F>
QuadResult integrate(const F& f, double a, double b, QuadTol tol = {}) {
  using detail::Panel;
  if (!(b > a)) return {0.0, 0.0, true, false};
  auto eval_panel = [&](double x0, double x1, double& err) {
    double whole = detail::gl7(f, x0, x1);
    double m = 0.5 * (x0 + x1);
    double halves = detail::gl7(f, x0, m) + detail::gl7(f, m, x1);
    err = std::abs(whole - halves);
    return halves;
  };
  std::priority_queue<Panel> heap;
  double e0;
  double v0 = eval_panel(a, b, e0);
  heap.push({a, b, v0, e0});
  double total = v0, toterr = e0;
  std::size_t n = 1;
  while (toterr > std::max(tol.abs, tol.rel * std::abs(total)) &&
         n < tol.max_panels) {
    Panel p = heap.top();
    heap.pop();
    total -= p.value;
    toterr -= p.err;
    double m = 0.5 * (p.a + p.b);
    if (m <= p.a || m >= p.b) {  // interval at floating-point resolution
      total += p.value;
      toterr += p.err;
      break;
    }
    double el, er;
    double vl = eval_panel(p.a, m, el);
    double vr = eval_panel(m, p.b, er);
    heap.push({p.a, m, vl, el});
    heap.push({m, p.b, vr, er});
    total += vl + vr;
    toterr += el + er;
    n += 2;
  }
  bool ok = toterr <= std::max(tol.abs, tol.rel * std::abs(total));
  return {total, toterr, ok, false};
}

// Improper integral toward a singular endpoint at 0: dyadic panels
// [b 2^{-k-1}, b 2^{-k}].  Divergence is declared when five consecutive
// dyadic panel sums fail the ratio test (heuristic; borderline cases are
// reported as non-converged, not diverged).
struct ImproperOpts {
  QuadTol panel_tol{1e-8, 0.0, 512};
  int max_levels = 160;
  double ratio_threshold = 0.98;
  int fails_needed = 5;
  double rel = 1e-6;
  double abs = 0.0;
};

template <class F>
QuadResult integrate_to_zero(const F& f, double b, ImproperOpts o = {}) {
  QuadResult out;
  double prev_mag = std::numeric_limits<double>::infinity();
  int fails = 0;
  double hi = b;
  for (int k = 0; k < o.max_levels; ++k) {
    double lo = 0.5 * hi;
    QuadResult p = integrate(f, lo, hi, o.panel_tol);
    if (!std::isfinite(p.value)) {
      out.diverged = true;
      return out;
    }
    out.value += p.value;
    out.error += p.error;
    double mag = std::abs(p.value);
    if (mag >= o.ratio_threshold * prev_mag && mag > 0) {
      if (++fails >= o.fails_needed) {
        out.diverged = true;
        return out;
      }
    } else {
      fails = 0;
    }
    prev_mag = mag;
    if (mag <= std::max(o.abs, o.rel * std::abs(out.value)) && k > 3) {
      // geometric continuation bound for the remaining tail
      out.error += mag;
      out.converged = true;
      return out;
    }
    hi = lo;
  }
  return out;  // neither converged nor provably divergent
}

// Improper integral toward +infinity: dyadic panels [a 2^k, a 2^{k+1}].
template <class F>
QuadResult integrate_to_inf(const F& f, double a, ImproperOpts o = {}) {
  QuadResult out;
  double prev_mag = std::numeric_limits<double>::infinity();
  int fails = 0;
  double lo = a;
  for (int k = 0; k < o.max_levels; ++k) {
    double hi = 2.0 * lo;
    QuadResult p = integrate(f, lo, hi, o.panel_tol);
    if (!std::isfinite(p.value)) {
      out.diverged = true;
      return out;
    }
    out.value += p.value;
    out.error += p.error;
    double mag = std::abs(p.value);
    if (mag >= o.ratio_threshold * prev_mag && mag > 0) {
      if (++fails >= o.fails_needed) {
        out.diverged = true;
        return out;
      }
    } else {
      fails = 0;
    }
    prev_mag = mag;
    if (mag <= std::max(o.abs, o.rel * std::abs(out.value)) && k > 3) {
      out.error += mag;
      out.converged = true;
      return out;
    }
    lo = hi;
  }
  return out;
}

// 2D adaptive tensor quadrature over a rectangle, GL7 x GL7 per panel,
// two-level estimate against the 2x2 split, global worst-first refinement.
struct QuadTol2D {
  double rel = 1e-4;
  double abs = 0.0;
  std::size_t max_panels = 60000;
};

namespace detail {

template <class F>
double gl7x7(const F& f, double ax, double bx, double ay, double by) {
  const double cx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
  const double cy = 0.5 * (ay + by), hy = 0.5 * (by - ay);
  double s = 0.0;
  for (int i = 0; i < 7; ++i) {
    double x = cx + hx * gl7_x[i];
    double row = 0.0;
    for (int j = 0; j < 7; ++j) row += gl7_w[j] * f(x, cy + hy * gl7_x[j]);
    s += gl7_w[i] * row;
  }
  return s * hx * hy;
}

struct Panel2 {
  double ax, bx, ay, by, value, err;
  bool operator<(const Panel2& o) const {
    if (err != o.err) return err < o.err;
    if (ax != o.ax) return ax > o.ax;
    return ay > o.ay;
  }
};

}  // namespace detail

template <class F>
QuadResult integrate2d(const F& f, double ax, double bx, double ay, double by,
                       QuadTol2D tol = {}) {
  using detail::Panel2;
  auto eval = [&](double x0, double x1, double y0, double y1, double& err) {
    double whole = detail::gl7x7(f, x0, x1, y0, y1);
    double mx = 0.5 * (x0 + x1), my = 0.5 * (y0 + y1);
    double q = detail::gl7x7(f, x0, mx, y0, my) +
               detail::gl7x7(f, mx, x1, y0, my) +
               detail::gl7x7(f, x0, mx, my, y1) +
               detail::gl7x7(f, mx, x1, my, y1);
    err = std::abs(whole - q);
    return q;
  };
  std::priority_queue<Panel2> heap;
  double e0;
  double v0 = eval(ax, bx, ay, by, e0);
  heap.push({ax, bx, ay, by, v0, e0});
  double total = v0, toterr = e0;
  std::size_t n = 1;
  while (toterr > std::max(tol.abs, tol.rel * std::abs(total)) &&
         n < tol.max_panels) {
    Panel2 p = heap.top();
    heap.pop();
    total -= p.value;
    toterr -= p.err;
    double mx = 0.5 * (p.ax + p.bx), my = 0.5 * (p.ay + p.by);
    if ((mx <= p.ax || mx >= p.bx) && (my <= p.ay || my >= p.by)) {
      total += p.value;
      toterr += p.err;
      break;
    }
    const double xs[3] = {p.ax, mx, p.bx};
    const double ys[3] = {p.ay, my, p.by};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double e;
        double v = eval(xs[i], xs[i + 1], ys[j], ys[j + 1], e);
        heap.push({xs[i], xs[i + 1], ys[j], ys[j + 1], v, e});
        total += v;
        toterr += e;
      }
    n += 4;
  }
  bool ok = toterr <= std::max(tol.abs, tol.rel * std::abs(total));
  return {total, toterr, ok, false};
}

}  // namespace nlcf
