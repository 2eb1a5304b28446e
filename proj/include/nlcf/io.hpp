#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcf/analysis.hpp"
#include "nlcf/flow.hpp"
#include "nlcf/geometry.hpp"
#include "nlcf/kernel.hpp"
#include "nlcf/perimeter.hpp"

namespace nlcf {

using nlohmann::json;

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) throw error(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// kernel specs:
//   {"type":"fractional","s":0.5}
//   {"type":"piecewise_power","alpha":1.0,"tail_exponent":3.0}
//   {"type":"table","rho":[...],"k0":[...],"interp":"loglog"}

inline Kernel kernel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw error("kernel spec: expected an object with a 'type' field");
  std::string type = j.at("type").get<std::string>();
  if (type == "fractional") {
    detail::check_keys(j, {"type", "s", "delta"}, "kernel spec");
    Kernel k = Kernel::fractional(j.at("s").get<double>());
    if (j.contains("delta")) k = k.regularized(j.at("delta").get<double>());
    return k;
  }
  if (type == "piecewise_power") {
    detail::check_keys(j, {"type", "alpha", "tail_exponent", "delta"}, "kernel spec");
    Kernel k = Kernel::piecewise_power(j.at("alpha").get<double>(),
                                       j.at("tail_exponent").get<double>());
    if (j.contains("delta")) k = k.regularized(j.at("delta").get<double>());
    return k;
  }
  if (type == "table") {
    detail::check_keys(j, {"type", "rho", "k0", "interp"}, "kernel spec");
    if (j.contains("interp") && j.at("interp").get<std::string>() != "loglog")
      throw error("kernel spec: only loglog interpolation is supported");
    return Kernel::table(j.at("rho").get<std::vector<double>>(),
                         j.at("k0").get<std::vector<double>>());
  }
  throw error("kernel spec: unknown type '" + type + "'");
}

inline json kernel_to_json(const Kernel& k) {
  json j;
  switch (k.type()) {
    case Kernel::Type::Fractional:
      j["type"] = "fractional";
      j["s"] = k.param_s();
      break;
    case Kernel::Type::PiecewisePower:
      j["type"] = "piecewise_power";
      j["alpha"] = k.param_alpha();
      j["tail_exponent"] = k.param_tail();
      break;
    case Kernel::Type::Table:
      j["type"] = "table";
      j["rho"] = k.table_rho();
      j["k0"] = k.table_k0();
      j["interp"] = "loglog";
      break;
  }
  if (k.near_cutoff() > 0) j["delta"] = k.near_cutoff();
  return j;
}

// ---------------------------------------------------------------------------
// shape specs: {"shape":"perturbed_cross","r":0.5,"modifiers":[...]}

inline PlanarSet shape_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape"))
    throw error("shape spec: expected an object with a 'shape' field");
  std::string name = j.at("shape").get<std::string>();
  auto num = [&](const char* key) { return j.at(key).get<double>(); };
  PlanarSet s;
  detail::check_keys(j,
                     {"shape", "r", "R", "center", "normal", "offset", "delta",
                      "cx", "a", "modifiers"},
                     "shape spec");
  if (name == "plane") {
    s = shapes::plane();
  } else if (name == "ball") {
    Vec2 c{0, 0};
    if (j.contains("center")) {
      auto v = j.at("center").get<std::vector<double>>();
      c = {v.at(0), v.at(1)};
    }
    s = shapes::ball(c, j.contains("R") ? num("R") : 1.0);
  } else if (name == "halfplane") {
    auto v = j.at("normal").get<std::vector<double>>();
    s = shapes::halfplane({v.at(0), v.at(1)}, j.contains("offset") ? num("offset") : 0.0);
  } else if (name == "cross") {
    s = shapes::cross_axis();
  } else if (name == "cross_rotated") {
    s = shapes::cross_rotated();
  } else if (name == "perturbed_cross") {
    s = shapes::perturbed_cross(num("r"));
  } else if (name == "complement_cross_square") {
    s = shapes::complement_cross_square(num("r"));
  } else if (name == "box_pair") {
    s = shapes::box_pair(num("r"));
  } else if (name == "box_pair_rotated") {
    s = shapes::box_pair_rotated(num("r"));
  } else if (name == "box_pair_dilated") {
    s = shapes::box_pair_dilated(num("r"), num("delta"));
  } else if (name == "droplet") {
    s = shapes::droplet();
  } else if (name == "droplet_axis") {
    s = shapes::droplet_axis();
  } else if (name == "droplet_square") {
    s = shapes::droplet_square(num("r"));
  } else if (name == "pinched_droplet") {
    s = shapes::pinched_droplet(num("delta"), num("r"));
  } else if (name == "tangent_balls") {
    s = shapes::tangent_balls();
  } else if (name == "near_tangent") {
    s = shapes::near_tangent(num("delta"), num("r"));
  } else if (name == "two_balls") {
    s = shapes::two_balls(num("cx"), num("R"));
  } else if (name == "capsule") {
    s = shapes::capsule(num("a"), num("R"));
  } else {
    throw error("shape spec: unknown shape '" + name + "'");
  }
  if (j.contains("modifiers")) {
    for (const auto& m : j.at("modifiers")) {
      detail::check_keys(m, {"op", "factor", "angle", "v", "lambda"}, "modifier");
      std::string op = m.at("op").get<std::string>();
      if (op == "scale")
        s = s.scaled(m.at("factor").get<double>());
      else if (op == "rotate")
        s = s.rotated(m.at("angle").get<double>());
      else if (op == "translate") {
        auto v = m.at("v").get<std::vector<double>>();
        s = s.translated({v.at(0), v.at(1)});
      } else if (op == "erode")
        s = s.eroded(m.at("lambda").get<double>());
      else if (op == "dilate")
        s = s.dilated(m.at("lambda").get<double>());
      else if (op == "complement")
        s = s.complemented();
      else
        throw error("modifier: unknown op '" + op + "'");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV and SVG emission (fixed formatting for byte reproducibility)

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p);
  if (!f) throw error("cannot write " + p.string());
  f << body;
}

inline std::string profile_csv(const std::vector<ProfileEntry>& entries) {
  std::ostringstream os;
  os << "arclength,x,y,value,bar,regularity\n";
  for (const auto& e : entries) {
    os << fmt(e.sample.arclength) << "," << fmt(e.sample.point.x) << ","
       << fmt(e.sample.point.y) << ",";
    if (e.estimate)
      os << fmt(e.estimate->value) << "," << fmt(e.estimate->bar());
    else
      os << "nan,nan";
    os << ","
       << (e.sample.regularity == Regularity::Angular ? "angular" : "smooth")
       << "\n";
  }
  return os.str();
}

inline std::string rscan_csv(const std::vector<PerimeterDiffReport>& rows) {
  std::ostringstream os;
  os << "r,diff,bound,bars\n";
  for (const auto& r : rows)
    os << fmt(r.r) << "," << fmt(r.diff) << "," << fmt(r.bound) << ","
       << fmt(r.quadrature_error + r.bound_error) << "\n";
  return os.str();
}

inline std::string diagnostics_csv(const FlowTrace& trace) {
  std::ostringstream os;
  os << "t";
  for (const auto& m : trace.members) os << ",area_eta_" << fmt(m.eta);
  std::size_t pairs = trace.diagnostics.empty()
                          ? 0
                          : trace.diagnostics.front().gap_areas.size();
  for (std::size_t p = 0; p < pairs; ++p) os << ",gap_area_" << p;
  os << ",inscribed_radius\n";
  for (const auto& d : trace.diagnostics) {
    os << fmt(d.t);
    for (double a : d.areas) os << "," << fmt(a);
    for (double g : d.gap_areas) os << "," << fmt(g);
    os << "," << fmt(d.inscribed_radius) << "\n";
  }
  return os.str();
}

inline std::string contours_csv(const FlowFrame& f) {
  std::ostringstream os;
  os << "polyline,x,y\n";
  for (std::size_t p = 0; p < f.contours.size(); ++p)
    for (const auto& v : f.contours[p])
      os << p << "," << fmt(v.x) << "," << fmt(v.y) << "\n";
  return os.str();
}

inline std::string barrier_csv(const BarrierReport& rep) {
  std::ostringstream os;
  os << "t,x,y,velocity,curvature,bar,margin,direction,pass,note\n";
  for (const auto& r : rep.rows)
    os << fmt(r.t) << "," << fmt(r.point.x) << "," << fmt(r.point.y) << ","
       << fmt(r.velocity) << "," << fmt(r.curvature) << "," << fmt(r.bar) << ","
       << fmt(r.margin) << "," << (r.supersolution ? "ge" : "le") << ","
       << (r.pass ? 1 : 0) << "," << r.note << "\n";
  return os.str();
}

inline json barrier_json(const BarrierReport& rep) {
  json j;
  j["family"] = rep.family;
  j["n_pass"] = rep.n_pass;
  j["n_fail"] = rep.n_fail;
  j["worst_slack"] = rep.worst_slack;
  j["pass"] = rep.pass;
  j["fitted"] = rep.fitted;
  return j;
}

// SVG rendering: member contours as polylines, finest gap shaded via the
// even-odd fill of its outer and inner contours
inline std::string render_svg(const FlowTrace& trace, std::size_t frame_idx,
                              int px = 640) {
  std::ostringstream os;
  const Window& w = trace.win;
  double sx = px / w.width();
  auto X = [&](double x) { return (x - w.x0) * sx; };
  auto Y = [&](double y) { return (w.y1 - y) * sx; };
  int py = static_cast<int>(std::lround(w.height() * sx));
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px
     << "\" height=\"" << py << "\" viewBox=\"0 0 " << px << " " << py
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto path_of = [&](const std::vector<std::vector<Vec2>>& polys) {
    std::ostringstream p;
    p << std::fixed << std::setprecision(3);
    for (const auto& line : polys) {
      for (std::size_t i = 0; i < line.size(); ++i)
        p << (i == 0 ? "M" : "L") << X(line[i].x) << " " << Y(line[i].y);
      p << " Z ";
    }
    return p.str();
  };
  // shaded gap layer between the finest outer/inner pair, if present
  std::size_t n = trace.members.size();
  if (n >= 2 && frame_idx < trace.members[n / 2 - 1].frames.size() &&
      frame_idx < trace.members[n / 2].frames.size()) {
    const auto& fo = trace.members[n / 2 - 1].frames[frame_idx];
    const auto& fi = trace.members[n / 2].frames[frame_idx];
    bool gap = false;
    if (frame_idx < trace.diagnostics.size()) {
      const auto& d = trace.diagnostics[frame_idx];
      if (!d.gap_areas.empty() && d.gap_areas.back() > 0) gap = true;
    }
    if (gap && (!fo.contours.empty() || !fi.contours.empty())) {
      os << "<path d=\"" << path_of(fo.contours) << path_of(fi.contours)
         << "\" fill=\"#c8c8c8\" fill-rule=\"evenodd\" stroke=\"none\"/>\n";
    }
  }
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                 "#d62728", "#9467bd", "#8c564b"};
  for (std::size_t m = 0; m < trace.members.size(); ++m) {
    if (frame_idx >= trace.members[m].frames.size()) continue;
    const auto& f = trace.members[m].frames[frame_idx];
    for (const auto& line : f.contours) {
      os << "<polyline fill=\"none\" stroke=\"" << colors[m % 6]
         << "\" stroke-width=\"1\" points=\"";
      std::ostringstream pts;
      pts << std::fixed << std::setprecision(3);
      for (const auto& v : line) pts << X(v.x) << "," << Y(v.y) << " ";
      os << pts.str() << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

// persist a trace: meta.json, diagnostics.csv, frames/*.csv
inline void save_trace(const FlowTrace& trace, const json& meta,
                       const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  {
    std::ofstream f(dir / "meta.json");
    f << meta.dump(2) << "\n";
  }
  write_file(dir / "diagnostics.csv", diagnostics_csv(trace));
  for (std::size_t m = 0; m < trace.members.size(); ++m)
    for (std::size_t fi = 0; fi < trace.members[m].frames.size(); ++fi) {
      std::ostringstream name;
      name << "member" << m << "_frame" << std::setw(4) << std::setfill('0')
           << fi << ".csv";
      write_file(dir / "frames" / name.str(),
                 contours_csv(trace.members[m].frames[fi]));
    }
}

inline std::string schema_text() {
  return
      "diagnostics.csv: t, area_eta_<eta>..., gap_area_<pair>..., inscribed_radius\n"
      "  areas: cell-counted area of each ladder member's superlevel set\n"
      "  gap_area_k: area(outer_k) - area(inner_k), outermost pair first\n"
      "  inscribed_radius: largest ball around the origin inside the finest gap\n"
      "frames/member<m>_frame<idx>.csv: polyline, x, y  (zero contours)\n"
      "profile.csv: arclength, x, y, value, bar, regularity\n"
      "rscan.csv: r, diff, bound, bars\n"
      "barriers_<family>.csv: t, x, y, velocity, curvature, bar, margin, direction, pass, note\n";
}

}  // namespace nlcf
