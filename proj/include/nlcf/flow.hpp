#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nlcf/curvature.hpp"
#include "nlcf/fft.hpp"
#include "nlcf/grid.hpp"

namespace nlcf {

struct FlowParams {
  double cfl = 0.4;
  int redistance_every = 5;
  double record_dt = 0.0;     // 0: ~60 records over [0, T]
  double band_cells = 8.0;    // active band half-width, in cells
  int edge_guard = 2;         // frozen ring at the window edge
  double M_cells = 12.0;      // truncation level, in cells
  double dt_floor = 1e-9;
};

struct FlowFrame {
  double t = 0.0;
  double area = 0.0;
  std::vector<std::vector<Vec2>> contours;
};

struct ThresholdTrace {
  double eta = 0.0;
  std::vector<FlowFrame> frames;
  bool extinct = false;
  double extinction_time = 0.0;
};

struct DiagnosticsRow {
  double t = 0.0;
  std::vector<double> areas;      // per ladder member
  std::vector<double> gap_areas;  // per (eta, -eta) pair, outermost first
  double inscribed_radius = 0.0;  // of the finest gap, centered at 0
};

struct FlowTrace {
  std::vector<double> times;
  std::vector<ThresholdTrace> members;
  std::vector<DiagnosticsRow> diagnostics;
  double h = 0.0;
  Window win;
};

struct LadderNestingError : error {
  using error::error;
};

// ---------------------------------------------------------------------------
// precomputed out-of-window correction at the zero level, on a coarse lattice

class TailTable {
 public:
  TailTable(const GridField& g, const Kernel& k, int stride = 4)
      : nx_(g.nx), ny_(g.ny), stride_(stride) {
    cx_ = (nx_ + stride - 1) / stride + 1;
    cy_ = (ny_ + stride - 1) / stride + 1;
    vals_.resize(static_cast<std::size_t>(cx_) * cy_);
    for (int cj = 0; cj < cy_; ++cj)
      for (int ci = 0; ci < cx_; ++ci) {
        int i = std::min(ci * stride, nx_ - 1);
        int j = std::min(cj * stride, ny_ - 1);
        vals_[static_cast<std::size_t>(cj) * cx_ + ci] =
            model_tail_correction(g, k, g.center(i, j), -g.model_shift, 1e-7);
      }
  }

  double at(int i, int j) const {
    double x = static_cast<double>(i) / stride_;
    double y = static_cast<double>(j) / stride_;
    int ci = std::min(static_cast<int>(x), cx_ - 2);
    int cj = std::min(static_cast<int>(y), cy_ - 2);
    double fx = x - ci, fy = y - cj;
    auto v = [&](int a, int b) {
      return vals_[static_cast<std::size_t>(b) * cx_ + a];
    };
    return (1 - fx) * (1 - fy) * v(ci, cj) + fx * (1 - fy) * v(ci + 1, cj) +
           (1 - fx) * fy * v(ci, cj + 1) + fx * fy * v(ci + 1, cj + 1);
  }

 private:
  int nx_, ny_, stride_, cx_, cy_;
  std::vector<double> vals_;
};

inline std::shared_ptr<const TailTable> tail_table(const GridField& g,
                                                   const Kernel& k) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const TailTable>> cache;
  std::ostringstream key;
  key << k.signature() << "|" << g.nx << "x" << g.ny << "|" << g.h << "|"
      << static_cast<int>(g.model.kind) << "|" << g.model.box_r << "|"
      << g.model.hp_offset << "|" << g.model_shift << "|" << g.win.x0 << ","
      << g.win.y0;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key.str());
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const TailTable>(g, k);
  cache[key.str()] = t;
  return t;
}

namespace detail {

// Rouy-Tourin upwind gradient magnitude for normal speed F (u_t = -F |Du|)
inline double upwind_grad(const GridField& g, int i, int j, double F) {
  double h = g.h;
  double dmx = (g.at(i, j) - g.at(i - 1, j)) / h;
  double dpx = (g.at(i + 1, j) - g.at(i, j)) / h;
  double dmy = (g.at(i, j) - g.at(i, j - 1)) / h;
  double dpy = (g.at(i, j + 1) - g.at(i, j)) / h;
  double ax, bx, ay, by;
  if (F > 0) {  // front moves inward in u: pick the entropy-consistent stencil
    ax = std::max(dmx, 0.0);
    bx = std::min(dpx, 0.0);
    ay = std::max(dmy, 0.0);
    by = std::min(dpy, 0.0);
  } else {
    ax = std::min(dmx, 0.0);
    bx = std::max(dpx, 0.0);
    ay = std::min(dmy, 0.0);
    by = std::max(dpy, 0.0);
  }
  return std::sqrt(std::max(ax * ax, bx * bx) + std::max(ay * ay, by * by));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// single-field convolution engine

class LevelSetEngine {
 public:
  LevelSetEngine(const PlanarSet& E, const Kernel& k, Window win, double h,
                 FlowParams params, double eta = 0.0)
      : k_(k), params_(params) {
    double M = params.M_cells * h;
    g_ = init_field(E, win, h, M, eta);
    init_u_ = g_.u;
    weights_ = cell_weights(k, g_.h, g_.nx, g_.ny);
    conv_ = std::make_unique<Conv2D>(*weights_);
    tails_ = tail_table(g_, k);
    sigma_.resize(g_.u.size());
    hfield_.resize(g_.u.size());
  }

  const GridField& field() const { return g_; }
  GridField& field() { return g_; }
  double time() const { return t_; }
  bool extinct() const { return extinct_; }
  double extinction_time() const { return extinction_time_; }

  // advance to target time; returns actual time reached
  double advance_to(double t_target) {
    while (t_ < t_target - 1e-14 && !extinct_) {
      step(t_target);
    }
    return t_;
  }

  FlowFrame snapshot() const {
    FlowFrame f;
    f.t = t_;
    f.area = superlevel_area(g_);
    f.contours = stitch_polylines(extract_contour(g_), 1e-9 * (1.0 + g_.win.width()));
    return f;
  }

 private:
  void compute_curvature() {
    for (std::size_t m = 0; m < g_.u.size(); ++m)
      sigma_[m] = vof_sign(g_.u[m], g_.h);
    conv_->apply(sigma_, hfield_);
    // out-of-window closure
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i)
        hfield_[static_cast<std::size_t>(j) * g_.nx + i] += tails_->at(i, j);
  }

  void step(double t_cap) {
    compute_curvature();
    const double bw = params_.band_cells * g_.h;
    const int guard = params_.edge_guard;
    double maxH = 0.0;
    bool any_inside = false;
    for (int j = guard; j < g_.ny - guard; ++j)
      for (int i = guard; i < g_.nx - guard; ++i) {
        double u = g_.at(i, j);
        if (u >= 0.0) any_inside = true;
        if (std::abs(u) < bw)
          maxH = std::max(maxH, std::abs(hfield_[static_cast<std::size_t>(j) * g_.nx + i]));
      }
    if (!any_inside) {
      extinct_ = true;
      extinction_time_ = t_;
      return;
    }
    double dt = params_.cfl * g_.h / std::max(maxH, 1e-12);
    dt = std::max(dt, params_.dt_floor * g_.h);
    dt = std::min(dt, t_cap - t_);
    for (int j = guard; j < g_.ny - guard; ++j)
      for (int i = guard; i < g_.nx - guard; ++i) {
        double u = g_.at(i, j);
        if (std::abs(u) >= bw) continue;
        double H = hfield_[static_cast<std::size_t>(j) * g_.nx + i];
        double grad = detail::upwind_grad(g_, i, j, H);
        double unew = u - dt * grad * H;
        g_.at(i, j) = std::clamp(unew, -g_.M, g_.M);
      }
    t_ += dt;
    if (++steps_since_redist_ >= params_.redistance_every) {
      bool has_contour = false;
      for (double v : g_.u)
        if (v >= 0.0) {
          has_contour = true;
          break;
        }
      if (has_contour) {
        redistance(g_);
        restore_guard();
      }
      steps_since_redist_ = 0;
    }
  }

  void restore_guard() {
    const int guard = params_.edge_guard;
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i)
        if (i < guard || j < guard || i >= g_.nx - guard || j >= g_.ny - guard)
          g_.at(i, j) = init_u_[static_cast<std::size_t>(j) * g_.nx + i];
  }

  Kernel k_;
  FlowParams params_;
  GridField g_;
  std::vector<double> init_u_, sigma_, hfield_;
  std::shared_ptr<const CellWeightTable> weights_;
  std::unique_ptr<Conv2D> conv_;
  std::shared_ptr<const TailTable> tails_;
  double t_ = 0.0;
  bool extinct_ = false;
  double extinction_time_ = 0.0;
  int steps_since_redist_ = 0;
};

inline std::vector<double> record_times(double T, double record_dt) {
  if (record_dt <= 0.0) record_dt = T / 60.0;
  std::vector<double> ts;
  for (double t = record_dt; t < T + 0.5 * record_dt; t += record_dt)
    ts.push_back(std::min(t, T));
  return ts;
}

// single-set engine: evolve {d_E >= 0}
inline FlowTrace evolve_set(const PlanarSet& E, const Kernel& k, double T,
                            Window win, double h, FlowParams params = {}) {
  FlowTrace trace;
  trace.h = h;
  trace.win = win;
  LevelSetEngine eng(E, k, win, h, params);
  ThresholdTrace member;
  member.eta = 0.0;
  member.frames.push_back(eng.snapshot());
  trace.times = record_times(T, params.record_dt);
  for (double t : trace.times) {
    eng.advance_to(t);
    member.frames.push_back(eng.snapshot());
    if (eng.extinct()) break;
  }
  member.extinct = eng.extinct();
  member.extinction_time = eng.extinction_time();
  trace.members.push_back(std::move(member));
  for (std::size_t fi = 0; fi < trace.members[0].frames.size(); ++fi) {
    DiagnosticsRow row;
    row.t = trace.members[0].frames[fi].t;
    row.areas = {trace.members[0].frames[fi].area};
    trace.diagnostics.push_back(row);
  }
  return trace;
}

// eta-ladder: evolve {d_E >= -eta} (outer) and {d_E >= +eta} (inner)
// independently; nesting is checked, not enforced
inline FlowTrace evolve_ladder(const PlanarSet& E, const Kernel& k, double T,
                               const std::vector<double>& etas, Window win,
                               double h, FlowParams params = {}) {
  // etas: positive half-ladder, e.g. {eta, eta/2, eta/4}; members are
  // +eta (outer) ... -eta (inner), outermost first
  std::vector<double> shifts;
  for (double e : etas) shifts.push_back(e);
  for (auto it = etas.rbegin(); it != etas.rend(); ++it) shifts.push_back(-*it);
  std::sort(shifts.begin(), shifts.end(), std::greater<double>());
  FlowTrace trace;
  trace.h = h;
  trace.win = win;
  std::vector<std::unique_ptr<LevelSetEngine>> engines;
  for (double s : shifts)
    engines.push_back(std::make_unique<LevelSetEngine>(E, k, win, h, params, s));
  trace.h = engines[0]->field().h;
  for (double s : shifts) {
    ThresholdTrace m;
    m.eta = s;
    trace.members.push_back(std::move(m));
  }
  auto record = [&](double t) {
    DiagnosticsRow row;
    row.t = t;
    for (std::size_t m = 0; m < engines.size(); ++m) {
      trace.members[m].frames.push_back(engines[m]->snapshot());
      row.areas.push_back(trace.members[m].frames.back().area);
    }
    // nesting check: member m+1 must stay inside member m within 2 cells
    const auto& g0 = engines[0]->field();
    for (std::size_t m = 0; m + 1 < engines.size(); ++m) {
      const auto& ga = engines[m]->field();
      const auto& gb = engines[m + 1]->field();
      int bad = 0;
      for (int j = 2; j < g0.ny - 2; ++j)
        for (int i = 2; i < g0.nx - 2; ++i)
          if (gb.at(i, j) >= 0.0) {
            // inside the smaller member: the bigger one must cover a
            // neighborhood of radius 2 cells
            bool covered = false;
            for (int dj = -2; dj <= 2 && !covered; ++dj)
              for (int di = -2; di <= 2 && !covered; ++di)
                if (ga.in_range(i + di, j + dj) && ga.at(i + di, j + dj) >= 0.0)
                  covered = true;
            if (!covered) ++bad;
          }
      if (bad > 0)
        throw LadderNestingError("ladder nesting violated beyond 2 cells at t=" +
                                 std::to_string(t));
    }
    // gap areas per symmetric pair and the inscribed radius of the finest gap
    std::size_t n = engines.size();
    for (std::size_t p = 0; p < n / 2; ++p) {
      double outer = row.areas[p];
      double inner = row.areas[n - 1 - p];
      row.gap_areas.push_back(std::max(outer - inner, 0.0));
    }
    {
      const auto& go = engines[n / 2 - 1]->field();   // finest outer
      const auto& gi = engines[n / 2]->field();       // finest inner
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < go.ny; ++j)
        for (int i = 0; i < go.nx; ++i) {
          bool in_gap = go.at(i, j) >= 0.0 && gi.at(i, j) < 0.0;
          if (!in_gap) best = std::min(best, norm(go.center(i, j)));
        }
      row.inscribed_radius = std::isinf(best) ? 0.0 : best;
    }
    trace.diagnostics.push_back(std::move(row));
  };
  record(0.0);
  trace.times = record_times(T, params.record_dt);
  for (double t : trace.times) {
    for (auto& e : engines) e->advance_to(t);
    record(t);
  }
  for (std::size_t m = 0; m < engines.size(); ++m) {
    trace.members[m].extinct = engines[m]->extinct();
    trace.members[m].extinction_time = engines[m]->extinction_time();
  }
  return trace;
}

// ---------------------------------------------------------------------------
// direct per-node scheme (small-grid oracle): every band node carries the
// curvature of its own superlevel set

inline GridField step_direct(const GridField& g, const Kernel& k, double dt,
                             double cfl = 0.4) {
  if (g.nx > 96 || g.ny > 96)
    throw error("step_direct: oracle scheme is restricted to grids <= 96^2");
  auto W = cell_weights(k, g.h, g.nx, g.ny);
  const int guard = 2;
  GridField out = g;
  // CFL check needs the max curvature over the band first
  std::vector<std::pair<int, int>> band;
  std::vector<double> H;
  double maxH = 0.0;
  for (int j = guard; j < g.ny - guard; ++j)
    for (int i = guard; i < g.nx - guard; ++i) {
      if (std::abs(g.at(i, j)) >= g.M * (1.0 - 1e-12)) continue;
      double c = grid_curvature(g, i, j, k, W.get());
      band.push_back({i, j});
      H.push_back(c);
      maxH = std::max(maxH, std::abs(c));
    }
  if (dt > cfl * g.h / std::max(maxH, 1e-300))
    throw error("step_direct: dt violates the CFL bound");
  for (std::size_t m = 0; m < band.size(); ++m) {
    auto [i, j] = band[m];
    double grad = detail::upwind_grad(g, i, j, H[m]);
    out.at(i, j) = std::clamp(g.at(i, j) - dt * grad * H[m], -g.M, g.M);
  }
  return out;
}

// drive the direct oracle to time T with automatic CFL steps
inline FlowTrace evolve_direct(const PlanarSet& E, const Kernel& k, double T,
                               Window win, double h, FlowParams params = {}) {
  FlowTrace trace;
  trace.win = win;
  double M = params.M_cells * h;
  GridField g = init_field(E, win, h, M);
  trace.h = g.h;
  std::vector<double> init_u = g.u;
  auto W = cell_weights(k, g.h, g.nx, g.ny);
  const int guard = 2;
  ThresholdTrace member;
  member.eta = 0.0;
  auto snapshot = [&](double t) {
    FlowFrame f;
    f.t = t;
    f.area = superlevel_area(g);
    f.contours = stitch_polylines(extract_contour(g), 1e-9);
    member.frames.push_back(std::move(f));
  };
  snapshot(0.0);
  trace.times = record_times(T, params.record_dt);
  double t = 0.0;
  int steps = 0;
  bool extinct = false;
  // out-of-window corrections are refreshed at the redistancing cadence:
  // between redistances the node levels drift by O(dt), within the scheme's
  // own accuracy (and the vanishing model has no level dependence at all)
  std::unordered_map<long, double> tail_memo;
  for (double t_rec : trace.times) {
    while (t < t_rec - 1e-14 && !extinct) {
      bool any_inside = false;
      for (double v : g.u)
        if (v >= 0.0) {
          any_inside = true;
          break;
        }
      if (!any_inside) {
        extinct = true;
        member.extinct = true;
        member.extinction_time = t;
        break;
      }
      // curvature over the band
      double maxH = 0.0;
      std::vector<std::pair<int, int>> band;
      std::vector<double> H;
      for (int j = guard; j < g.ny - guard; ++j)
        for (int i = guard; i < g.nx - guard; ++i) {
          if (std::abs(g.at(i, j)) >= g.M * (1.0 - 1e-12)) continue;
          long key = static_cast<long>(j) * g.nx + i;
          auto it = tail_memo.find(key);
          double tail;
          if (it == tail_memo.end()) {
            tail = model_tail_correction(g, k, g.center(i, j),
                                         g.at(i, j) - g.model_shift);
            tail_memo.emplace(key, tail);
          } else {
            tail = it->second;
          }
          double c = grid_curvature_in_window(g, i, j, *W) + tail;
          band.push_back({i, j});
          H.push_back(c);
          maxH = std::max(maxH, std::abs(c));
        }
      // the oracle favors accuracy over speed: a quarter of the engine's
      // default Courant number keeps the per-level transport error small
      double eff_cfl = std::min(params.cfl, 0.1);
      double dt = std::min(eff_cfl * g.h / std::max(maxH, 1e-12), t_rec - t);
      for (std::size_t m = 0; m < band.size(); ++m) {
        auto [i, j] = band[m];
        double grad = detail::upwind_grad(g, i, j, H[m]);
        g.at(i, j) = std::clamp(g.at(i, j) - dt * grad * H[m], -g.M, g.M);
      }
      t += dt;
      if (++steps % params.redistance_every == 0) {
        bool has_contour = false;
        for (double v : g.u)
          if (v >= 0.0) {
            has_contour = true;
            break;
          }
        if (has_contour) {
          redistance(g);
          for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
              if (i < guard || j < guard || i >= g.nx - guard ||
                  j >= g.ny - guard)
                g.at(i, j) = init_u[static_cast<std::size_t>(j) * g.nx + i];
          if (g.model.kind != AsymModel::Kind::Vanishing) tail_memo.clear();
        }
      }
    }
    snapshot(t);
  }
  trace.members.push_back(std::move(member));
  return trace;
}

}  // namespace nlcf
