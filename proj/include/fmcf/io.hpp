#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmcf/barriers.hpp"
#include "fmcf/curvature.hpp"
#include "fmcf/flow.hpp"
#include "fmcf/scenarios.hpp"

namespace fmcf {

inline constexpr int kFormatVersion = 1;

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form of a double.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int prec = 1; prec < 17; ++prec) {
    char b2[32];
    std::snprintf(b2, sizeof b2, "%.*g", prec, v);
    if (std::strtod(b2, nullptr) == v) return b2;
  }
  return buf;
}

/// Plain-text curve: one "x y" pair per line; blank lines and lines starting with '#' skipped.
inline ClosedCurve read_curve(std::istream& in) {
  std::vector<Point> p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Point q;
    if (!(ls >> q.x >> q.y)) throw GeometryError("curve file line " + std::to_string(lineno) + ": expected 'x y'");
    p.push_back(q);
  }
  return ClosedCurve(std::move(p));
}

inline ClosedCurve read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve file " + path);
  return read_curve(in);
}

inline void write_curve(std::ostream& out, const ClosedCurve& c) {
  for (const auto& p : c.nodes()) out << fmt(p.x) << ' ' << fmt(p.y) << '\n';
}

inline json to_json(const CurvatureResult& r) {
  return {{"value", r.value},
          {"error_estimate", r.error_estimate},
          {"near_field_share", r.near_field_share},
          {"tail_correction", r.tail_correction},
          {"degraded_accuracy", r.degraded_accuracy},
          {"corner_warning", r.corner_warning}};
}

inline json to_json(const StripBounds& b) {
  return {{"eta", b.eta}, {"kappa_geom", b.kappa_geom}, {"eta_at", b.eta_at}, {"kappa_at", b.kappa_at}};
}

inline json to_json(const StripPositivityReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"t", s.t}, {"value", s.value}, {"error_estimate", s.error_estimate}});
  return {{"parameters", {{"epsilon", r.spec.epsilon}, {"delta", r.spec.delta}, {"s", r.s}, {"t_max", r.t_max}}},
          {"samples", samples},
          {"min_value", r.min_value},
          {"argmin_t", r.argmin_t},
          {"max_error", r.max_error},
          {"c0_estimate", r.c0_estimate},
          {"waist_classical_curvature", r.waist_classical_curvature}};
}

inline json to_json(const NeckpinchParams& p) {
  return {{"kappa_speed", p.kappa_speed}, {"epsilon0", p.epsilon0},
          {"delta", p.delta},             {"lobe_radius", p.lobe_radius},
          {"L", p.L},                     {"c0_estimate", p.c0_estimate},
          {"s", p.s},                     {"sigma", p.sigma},
          {"containment_margin", p.containment_margin}};
}

inline json to_json(const FlowEvent& e) {
  return {{"kind", to_string(e.kind)},
          {"time", e.time},
          {"location", {e.location.x, e.location.y}},
          {"details", e.details}};
}

inline json events_json(const std::vector<FlowEvent>& ev) {
  json a = json::array();
  for (const auto& e : ev) a.push_back(to_json(e));
  return a;
}

/// Per-snapshot summary: time, step, front count, total area and y-axis neck width.
inline json snapshots_json(const FlowRun& run) {
  json a = json::array();
  for (const auto& st : run.trajectory) {
    double area = 0.0;
    for (const auto& f : st.fronts) area += f.area();
    a.push_back({{"time", st.time},
                 {"step", st.step_count},
                 {"fronts", st.fronts.size()},
                 {"total_area", area},
                 {"min_neck_width", detail::axis_width(st.fronts)}});
  }
  return a;
}

inline json to_json(const ScenarioReport& r) {
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  json asserts = json::array();
  for (const auto& a : r.assertions)
    asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  json ts = json::array();
  for (const auto& row : r.timeseries)
    ts.push_back({row.time, row.min_neck_width, row.lobe_inradius_left, row.lobe_inradius_right,
                  row.total_area});
  return {{"name", r.name},
          {"verdict", to_string(r.verdict)},
          {"parameters", params},
          {"assertions", asserts},
          {"events", events_json(r.events)},
          {"timeseries_columns",
           {"time", "min_neck_width", "lobe_inradius_left", "lobe_inradius_right", "total_area"}},
          {"timeseries", ts}};
}

inline const char* kTrajectoryHeader = "time,front_id,node_index,x,y,H_s";
inline const char* kTimeseriesHeader =
    "time,min_neck_width,lobe_inradius_left,lobe_inradius_right,total_area";

/// Trajectory CSV with columns time, front_id, node_index, x, y, H_s.
inline void write_trajectory_csv(std::ostream& out, const FlowRun& run) {
  out << kTrajectoryHeader << '\n';
  for (const auto& st : run.trajectory) {
    for (std::size_t f = 0; f < st.fronts.size(); ++f) {
      const auto& c = st.fronts[f];
      const bool have = f < st.curvature.size() && st.curvature[f].size() == c.size();
      for (std::size_t i = 0; i < c.size(); ++i)
        out << fmt(st.time) << ',' << f << ',' << i << ',' << fmt(c[i].x) << ',' << fmt(c[i].y)
            << ',' << (have ? fmt(st.curvature[f][i]) : std::string("nan")) << '\n';
    }
  }
}

inline void write_timeseries_csv(std::ostream& out, const ScenarioReport& r) {
  out << kTimeseriesHeader << '\n';
  for (const auto& row : r.timeseries)
    out << fmt(row.time) << ',' << fmt(row.min_neck_width) << ',' << fmt(row.lobe_inradius_left)
        << ',' << fmt(row.lobe_inradius_right) << ',' << fmt(row.total_area) << '\n';
}

}  // namespace fmcf
