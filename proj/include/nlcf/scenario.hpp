#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "nlcf/io.hpp"
#include "nlcf/parallel.hpp"

namespace nlcf {

namespace fs = std::filesystem;

struct ScenarioConfig {
  std::string scenario;
  json kernel_spec;
  json shape_spec;  // curvature-profile only
  Window window{-2, -2, 2, 2};
  double h = 4.0 / 256;
  double T = 0.0;          // 0: scenario default
  double eta = 0.0;        // 0: scenario default (8 h)
  int records = 40;
  double cfl = 0.4;
  int redistance_every = 5;
  double band_cells = 8.0;
  double M_cells = 12.0;
  double R_loc = 2.0;                  // minimality localization radius
  std::vector<double> r_grid;          // minimality scan
  double spacing = 0.25;               // curvature-profile sample spacing
  std::string outdir = "out";
  std::uint64_t seed = 42;
};

inline ScenarioConfig parse_config(const json& j) {
  detail::check_keys(j,
                     {"scenario", "kernel", "shape", "grid", "output", "seed",
                      "minimality", "profile"},
                     "config");
  ScenarioConfig c;
  if (!j.contains("scenario")) throw error("config: missing 'scenario'");
  c.scenario = j.at("scenario").get<std::string>();
  const std::vector<std::string> known = {
      "ball",      "cross-strong", "cross-weak",        "droplet",
      "tangent-balls", "minimality",  "barriers",          "curvature-profile",
      "kernel-info"};
  if (std::find(known.begin(), known.end(), c.scenario) == known.end())
    throw error("config: unknown scenario '" + c.scenario + "'");
  if (j.contains("kernel")) c.kernel_spec = j.at("kernel");
  if (j.contains("shape")) c.shape_spec = j.at("shape");
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::check_keys(g,
                       {"window", "h", "T", "eta", "records", "cfl",
                        "redistance_every", "band_cells", "M_cells"},
                       "config.grid");
    if (g.contains("window")) {
      auto w = g.at("window").get<std::vector<double>>();
      if (w.size() != 4) throw error("config.grid.window: need [x0,y0,x1,y1]");
      c.window = {w[0], w[1], w[2], w[3]};
    }
    if (g.contains("h")) c.h = g.at("h").get<double>();
    if (g.contains("T")) c.T = g.at("T").get<double>();
    if (g.contains("eta")) c.eta = g.at("eta").get<double>();
    if (g.contains("records")) c.records = g.at("records").get<int>();
    if (g.contains("cfl")) c.cfl = g.at("cfl").get<double>();
    if (g.contains("redistance_every"))
      c.redistance_every = g.at("redistance_every").get<int>();
    if (g.contains("band_cells")) c.band_cells = g.at("band_cells").get<double>();
    if (g.contains("M_cells")) c.M_cells = g.at("M_cells").get<double>();
  }
  if (j.contains("minimality")) {
    const json& m = j.at("minimality");
    detail::check_keys(m, {"R", "r_grid"}, "config.minimality");
    if (m.contains("R")) c.R_loc = m.at("R").get<double>();
    if (m.contains("r_grid")) c.r_grid = m.at("r_grid").get<std::vector<double>>();
  }
  if (j.contains("profile")) {
    const json& p = j.at("profile");
    detail::check_keys(p, {"spacing"}, "config.profile");
    if (p.contains("spacing")) c.spacing = p.at("spacing").get<double>();
  }
  if (j.contains("output")) c.outdir = j.at("output").get<std::string>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (!(c.h > 0)) throw error("config: h must be positive");
  return c;
}

inline json config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["kernel"] = c.kernel_spec;
  if (!c.shape_spec.is_null()) j["shape"] = c.shape_spec;
  j["grid"] = {{"window", {c.window.x0, c.window.y0, c.window.x1, c.window.y1}},
               {"h", c.h},
               {"T", c.T},
               {"eta", c.eta},
               {"records", c.records},
               {"cfl", c.cfl},
               {"redistance_every", c.redistance_every},
               {"band_cells", c.band_cells},
               {"M_cells", c.M_cells}};
  j["minimality"] = {{"R", c.R_loc}, {"r_grid", c.r_grid}};
  j["profile"] = {{"spacing", c.spacing}};
  j["output"] = c.outdir;
  j["seed"] = c.seed;
  return j;
}

namespace detail {

inline FlowParams flow_params(const ScenarioConfig& c, double T) {
  FlowParams p;
  p.cfl = c.cfl;
  p.redistance_every = c.redistance_every;
  p.band_cells = c.band_cells;
  p.M_cells = c.M_cells;
  p.record_dt = T / std::max(1, c.records);
  return p;
}

inline Kernel scenario_kernel(const ScenarioConfig& c, const json& fallback) {
  return kernel_from_json(c.kernel_spec.is_null() ? fallback : c.kernel_spec);
}

}  // namespace detail

// returns 0 on pass, 1 on a quantitative failure; configuration errors and
// numerical aborts are thrown and mapped to exit codes by the caller
inline int run_scenario(ScenarioConfig c) {
  fs::create_directories(c.outdir);
  json summary;
  summary["scenario"] = c.scenario;
  bool pass = true;

  if (c.scenario == "ball") {
    Kernel k = detail::scenario_kernel(c, json{{"type", "fractional"}, {"s", 0.5}});
    double R = 1.0;
    auto traj = ball_evolution(k, R);
    double T_oracle = traj.extinction_time;
    if (c.T <= 0) c.T = 1.3 * T_oracle;
    if (c.window.width() <= 0) c.window = {-1.4, -1.4, 1.4, 1.4};
    auto trace = evolve_set(shapes::ball({0, 0}, R), k, c.T, c.window, c.h,
                            detail::flow_params(c, c.T));
    save_trace(trace, config_to_json(c), c.outdir);
    double T_grid = trace.members[0].extinct ? trace.members[0].extinction_time
                                             : c.T;
    double rel = std::abs(T_grid - T_oracle) / T_oracle;
    summary["extinction_time"] = T_grid;
    summary["oracle_extinction_time"] = T_oracle;
    summary["relative_error"] = rel;
    summary["threshold"] = 0.05;
    pass = trace.members[0].extinct && rel <= 0.05;
  } else if (c.scenario == "cross-strong" || c.scenario == "cross-weak" ||
             c.scenario == "droplet" || c.scenario == "tangent-balls") {
    json def_kernel = c.scenario == "cross-weak"
                          ? json{{"type", "piecewise_power"},
                                 {"alpha", 1.0},
                                 {"tail_exponent", 3.0}}
                          : json{{"type", "fractional"}, {"s", 0.5}};
    Kernel k = detail::scenario_kernel(c, def_kernel);
    PlanarSet E;
    Verdict expect;
    double expect_p = 0.0, p_tol = 0.0;
    if (c.scenario == "cross-strong" || c.scenario == "cross-weak") {
      E = shapes::cross_rotated();
      expect = c.scenario == "cross-strong" ? Verdict::Fattening
                                            : Verdict::NoFattening;
    } else if (c.scenario == "droplet") {
      E = shapes::droplet_axis();
      expect = Verdict::Fattening;
      if (c.window.width() < 6.0) c.window = {-3.2, -3.2, 3.2, 3.2};
    } else {
      E = shapes::tangent_balls();
      expect = Verdict::NoFattening;
      if (c.window.width() < 4.5) c.window = {-2.4, -2.4, 2.4, 2.4};
    }
    double s = k.fractional_s().value_or(0.5);
    if (expect == Verdict::Fattening) {
      expect_p = 1.0 / (1.0 + s);
      p_tol = (c.scenario == "droplet" ? 0.20 : 0.15) * expect_p;
    }
    if (c.T <= 0) {
      if (c.scenario == "cross-strong") {
        LambdaTable lam(k, 0.5);
        c.T = lam.lambda(0.3);
      } else if (c.scenario == "droplet") {
        LambdaTable lam(k, 0.5);
        c.T = lam.lambda(0.25);
      } else if (c.scenario == "tangent-balls") {
        c.T = 0.5 * ball_evolution(k, 1.0).extinction_time;
      } else {
        c.T = 0.35;
      }
    }
    if (c.eta <= 0) c.eta = 8.0 * c.h;
    std::vector<double> etas{c.eta, 0.5 * c.eta, 0.25 * c.eta};
    auto trace = evolve_ladder(E, k, c.T, etas, c.window, c.h,
                               detail::flow_params(c, c.T));
    save_trace(trace, config_to_json(c), c.outdir);
    auto rep = assess_fattening(trace, etas, c.seed);
    summary["verdict"] = to_string(rep.verdict);
    summary["expected"] = to_string(expect);
    summary["a_min"] = rep.a_min;
    summary["a_eps"] = rep.a_eps;
    pass = rep.verdict == expect;
    if (expect == Verdict::Fattening) {
      if (rep.exponent) {
        summary["exponent"] = rep.exponent->p;
        summary["exponent_expected"] = expect_p;
        summary["exponent_band"] = {rep.exponent->p_lo, rep.exponent->p_hi};
        if (std::abs(rep.exponent->p - expect_p) > p_tol) pass = false;
      } else {
        pass = false;
        summary["exponent"] = nullptr;
      }
    }
    // SVG frames
    for (std::size_t fi = 0; fi < trace.diagnostics.size(); ++fi) {
      std::ostringstream name;
      name << "frame" << std::setw(4) << std::setfill('0') << fi << ".svg";
      write_file(fs::path(c.outdir) / name.str(), render_svg(trace, fi));
    }
  } else if (c.scenario == "minimality") {
    Kernel k = detail::scenario_kernel(c, json{{"type", "fractional"}, {"s", 0.5}});
    if (c.r_grid.empty())
      for (int i = 1; i <= 10; ++i) c.r_grid.push_back(0.1 * i);
    std::vector<PerimeterDiffReport> rows;
    for (double r : c.r_grid) {
      if (!(c.R_loc > std::sqrt(2.0) * r)) continue;
      rows.push_back(per_diff_cross(k, r, c.R_loc));
    }
    write_file(fs::path(c.outdir) / "rscan.csv", rscan_csv(rows));
    auto witness = find_nonminimality_witness(k, c.R_loc, c.r_grid);
    bool bound_ok = true;
    for (const auto& r : rows)
      if (r.diff > r.bound + r.quadrature_error + r.bound_error) bound_ok = false;
    summary["witness_found"] = bool(witness);
    if (witness) {
      summary["witness_r"] = witness->r;
      summary["witness_diff"] = witness->report.diff;
      summary["witness_margin"] = witness->margin;
    }
    summary["bound_respected"] = bound_ok;
    pass = bool(witness) && bound_ok;
  } else if (c.scenario == "barriers") {
    Kernel kf = detail::scenario_kernel(c, json{{"type", "fractional"}, {"s", 0.5}});
    Kernel kw = Kernel::piecewise_power(1.0, 3.0);
    json all = json::array();
    for (auto fam :
         {BarrierFamily::ErodedLevelSets, BarrierFamily::GrowingPerturbedCross,
          BarrierFamily::ShrinkingBoxes, BarrierFamily::DropletPinch,
          BarrierFamily::TwoBallPinch}) {
      const Kernel& k = fam == BarrierFamily::ShrinkingBoxes ? kw : kf;
      auto rep = verify_barrier(fam, k);
      write_file(fs::path(c.outdir) / ("barriers_" + rep.family + ".csv"),
                 barrier_csv(rep));
      all.push_back(barrier_json(rep));
      if (!rep.pass) pass = false;
    }
    summary["families"] = all;
  } else if (c.scenario == "curvature-profile") {
    Kernel k = detail::scenario_kernel(c, json{{"type", "fractional"}, {"s", 0.5}});
    if (c.shape_spec.is_null())
      throw error("curvature-profile: config needs a 'shape'");
    PlanarSet E = shape_from_json(c.shape_spec);
    auto samples = boundary_sample(E, c.spacing, c.window);
    auto entries = curvature_profile(E, k, samples);
    write_file(fs::path(c.outdir) / "profile.csv", profile_csv(entries));
    int evaluated = 0;
    for (const auto& e : entries)
      if (e.estimate) ++evaluated;
    summary["samples"] = entries.size();
    summary["evaluated"] = evaluated;
    pass = evaluated > 0;
  } else if (c.scenario == "kernel-info") {
    Kernel k = detail::scenario_kernel(c, json{{"type", "fractional"}, {"s", 0.5}});
    auto rep = check_integrability(k);
    auto regime = classify_regime_report(k);
    json info;
    info["kernel"] = kernel_to_json(k);
    info["integrability"] = {{"near_field", rep.near_field},
                             {"tail", rep.tail},
                             {"near_diverges", rep.near_diverges},
                             {"tail_diverges", rep.tail_diverges},
                             {"pass", rep.pass}};
    info["regime"] = regime.verdict == Regime::Strong   ? "strong"
                     : regime.verdict == Regime::Weak   ? "weak"
                                                        : "undetermined";
    info["unimpiu_sampled_inf"] = regime.unimpiu_inf;
    if (rep.pass) {
      json table = json::array();
      for (double r : {0.25, 0.5, 1.0, 2.0}) {
        json row;
        row["r"] = r;
        row["psi"] = psi(k, r);
        auto ph = phi(k, r);
        row["phi"] = ph.finite ? json(ph.value) : json("infinite");
        row["tail_mass"] = tail_mass(k, r);
        row["ball_curvature"] = ball_curvature(k, r);
        table.push_back(row);
      }
      info["table"] = table;
    }
    write_file(fs::path(c.outdir) / "kernel_info.json", info.dump(2) + "\n");
    pass = rep.pass;
  }

  summary["pass"] = pass;
  {
    std::ofstream f(fs::path(c.outdir) / "summary.json");
    f << summary.dump(2) << "\n";
  }
  {
    std::ofstream f(fs::path(c.outdir) / "meta.json");
    f << config_to_json(c).dump(2) << "\n";
  }
  write_file(fs::path(c.outdir) / "schema.txt", schema_text());
  return pass ? 0 : 1;
}

// re-render SVG frames from a persisted trace directory
inline int render_frames(const std::string& dir) {
  fs::path d(dir);
  std::ifstream mf(d / "meta.json");
  if (!mf) throw error("render: missing meta.json in " + dir);
  json meta = json::parse(mf);
  auto w = meta.at("grid").at("window").get<std::vector<double>>();
  FlowTrace trace;
  trace.win = {w[0], w[1], w[2], w[3]};
  // collect member/frame files
  std::map<int, std::map<int, fs::path>> files;
  for (const auto& e : fs::directory_iterator(d / "frames")) {
    std::string n = e.path().filename().string();
    int m, fi;
    if (std::sscanf(n.c_str(), "member%d_frame%d.csv", &m, &fi) == 2)
      files[m][fi] = e.path();
  }
  if (files.empty()) throw error("render: no frame files in " + dir);
  for (auto& [m, frames] : files) {
    ThresholdTrace tt;
    for (auto& [fi, p] : frames) {
      FlowFrame f;
      std::ifstream cf(p);
      std::string line;
      std::getline(cf, line);  // header
      int last = -1;
      while (std::getline(cf, line)) {
        int pid;
        double x, y;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &pid, &x, &y) == 3) {
          if (pid != last) {
            f.contours.emplace_back();
            last = pid;
          }
          f.contours.back().push_back({x, y});
        }
      }
      tt.frames.push_back(std::move(f));
    }
    trace.members.push_back(std::move(tt));
  }
  // gap flags from diagnostics.csv (last gap column if present)
  std::size_t nframes = trace.members[0].frames.size();
  {
    std::ifstream df(d / "diagnostics.csv");
    if (df) {
      std::string header;
      std::getline(df, header);
      int gap_cols = 0;
      {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ','))
          if (col.rfind("gap_area", 0) == 0) ++gap_cols;
      }
      std::string line;
      while (std::getline(df, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::atof(cell.c_str()));
        DiagnosticsRow row;
        if (!vals.empty()) row.t = vals[0];
        if (gap_cols > 0 && vals.size() >= 2)
          row.gap_areas.assign(gap_cols, vals[vals.size() - 2]);
        trace.diagnostics.push_back(row);
      }
    }
  }
  for (std::size_t fi = 0; fi < nframes; ++fi) {
    std::ostringstream name;
    name << "frame" << std::setw(4) << std::setfill('0') << fi << ".svg";
    write_file(d / name.str(), render_svg(trace, fi));
  }
  return 0;
}

}  // namespace nlcf
