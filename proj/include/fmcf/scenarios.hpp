#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "fmcf/barriers.hpp"
#include "fmcf/flow.hpp"
#include "fmcf/shapes.hpp"

namespace fmcf {

/// Upper-right quarter of the dumbbell, from the far lobe point (L + rho, 0) counterclockwise
/// around the lobe to the tangency with the neck profile, then along the profile to (0, g(0)).
/// Returned as a dense polyline.
struct DumbbellQuarter {
  std::vector<Point> path;
  double drawn_radius = 0.0;
  double join_t = 0.0;
};

inline DumbbellQuarter dumbbell_quarter(const NeckpinchParams& params, std::size_t dense = 20000) {
  const StripSpec neck{params.sigma * params.epsilon0, params.delta};
  const auto [rho, tj] = detail::axis_distance_to_profile(neck, params.L);
  if (!(rho >= params.lobe_radius + params.containment_margin))
    throw GeometryError("dumbbell join impossible: lobe circle tangent to the neck has radius " +
                        std::to_string(rho) + " < lobe_radius + margin");
  if (!(tj > 0.0 && tj < params.L))
    throw GeometryError("dumbbell join impossible: tangency abscissa outside (0, L)");
  DumbbellQuarter q;
  q.drawn_radius = rho;
  q.join_t = tj;
  const Point c{params.L, 0.0};
  const Point tp{tj, strip_profile(neck, tj)};
  const double theta_j = std::atan2(tp.y, tp.x - c.x);
  const double arc = rho * theta_j;
  const std::size_t arc_pts = std::max<std::size_t>(16, static_cast<std::size_t>(dense * arc / (arc + tj)));
  for (std::size_t k = 0; k < arc_pts; ++k) {
    const double th = theta_j * static_cast<double>(k) / arc_pts;
    q.path.push_back(c + rho * Point{std::cos(th), std::sin(th)});
  }
  const std::size_t neck_pts = std::max<std::size_t>(16, dense - arc_pts);
  for (std::size_t k = 0; k <= neck_pts; ++k) {
    const double t = tj * (1.0 - static_cast<double>(k) / neck_pts);
    q.path.push_back({t, strip_profile(neck, t)});
  }
  return q;
}

/// Dumbbell: lobe circles about (+-L, 0) joined by the neck |y| < sigma eps0 + (2/pi) atan(delta x^2)
/// with C^1 tangent joins. The quarter is sampled at the local target spacing and mirrored, so
/// the node set is exactly symmetric in both axes: node 0 is (L + rho, 0), node Q is the top of the
/// neck on the y-axis, node 2Q the far left point, node 3Q the bottom of the neck.
inline ClosedCurve build_dumbbell(const NeckpinchParams& params, const SpacingField& field) {
  params.validate();
  if (!(field.h > 0.0)) throw DomainError("dumbbell needs a positive target spacing");
  const auto q = dumbbell_quarter(params);
  const auto& path = q.path;
  std::vector<double> warp(path.size(), 0.0);
  for (std::size_t k = 1; k < path.size(); ++k)
    warp[k] = warp[k - 1] + distance(path[k - 1], path[k]) / field.at(0.5 * (path[k - 1] + path[k]));
  const double total = warp.back();
  const auto Q = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(total)));
  std::vector<Point> quarter;
  std::size_t k = 0;
  for (std::size_t j = 0; j < Q; ++j) {
    const double w = total * static_cast<double>(j) / Q;
    while (k + 2 < path.size() && warp[k + 1] <= w) ++k;
    const double u = (w - warp[k]) / (warp[k + 1] - warp[k]);
    quarter.push_back(path[k] + u * (path[k + 1] - path[k]));
  }
  quarter[0].y = 0.0;
  const Point top{0.0, path.back().y};
  std::vector<Point> nodes(quarter);
  nodes.push_back(top);
  for (std::size_t j = Q - 1; j >= 1; --j) nodes.push_back({-quarter[j].x, quarter[j].y});
  nodes.push_back({-quarter[0].x, 0.0});
  for (std::size_t j = 1; j < Q; ++j) nodes.push_back({-quarter[j].x, -quarter[j].y});
  nodes.push_back({0.0, -top.y});
  for (std::size_t j = Q - 1; j >= 1; --j) nodes.push_back({quarter[j].x, -quarter[j].y});
  return ClosedCurve(std::move(nodes));
}

/// Discretised upper/lower boundary of the strip E_eps0 over |x| <= half_length, closed by
/// vertical caps, for containment checks.
inline ClosedCurve strip_window(const StripSpec& spec, double half_length, double h) {
  return truncated_band([&](double x) { return strip_profile(spec, x); }, spec.epsilon + 1.0, 0.0,
                        h, half_length, 1e-9)
      .curve;
}

enum class Verdict { reproduced, not_reproduced, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::reproduced: return "reproduced";
    case Verdict::not_reproduced: return "not_reproduced";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct TimeseriesRow {
  double time = 0.0;
  double min_neck_width = 0.0;
  double lobe_inradius_left = 0.0;
  double lobe_inradius_right = 0.0;
  double total_area = 0.0;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ScenarioReport {
  std::string name;
  std::map<std::string, double> parameters;
  std::vector<TimeseriesRow> timeseries;
  std::vector<FlowEvent> events;
  std::vector<Assertion> assertions;
  Verdict verdict = Verdict::inconclusive;
  FlowRun run;

  void add(std::string assertion, bool ok, std::string detail) {
    assertions.push_back({std::move(assertion), ok, std::move(detail)});
  }
  void decide() {
    verdict = Verdict::reproduced;
    for (const auto& a : assertions)
      if (!a.passed) verdict = Verdict::not_reproduced;
  }
};

namespace detail {

/// Width of the set along the y-axis: spread of the crossings of x = 0 by all fronts,
/// 0 when no front crosses it.
inline double axis_width(const std::vector<ClosedCurve>& fronts) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  int crossings = 0;
  for (const auto& c : fronts) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Point& a = c[i];
      const Point& b = c.at(static_cast<std::ptrdiff_t>(i) + 1);
      if ((a.x > 0.0) == (b.x > 0.0)) continue;
      const double y = a.y + (0.0 - a.x) * (b.y - a.y) / (b.x - a.x);
      lo = std::min(lo, y);
      hi = std::max(hi, y);
      ++crossings;
    }
  }
  return crossings >= 2 ? hi - lo : 0.0;
}

/// Centroid of the part of the polygon in the half-plane side * x >= 0.
inline Point half_centroid(const ClosedCurve& c, int side) {
  std::vector<Point> clipped;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = c[i];
    const Point& b = c.at(static_cast<std::ptrdiff_t>(i) + 1);
    const bool ia = side * a.x >= 0.0;
    const bool ib = side * b.x >= 0.0;
    if (ia) clipped.push_back(a);
    if (ia != ib) clipped.push_back({0.0, a.y + (0.0 - a.x) * (b.y - a.y) / (b.x - a.x)});
  }
  double ar = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    const Point& p = clipped[i];
    const Point& q = clipped[(i + 1) % clipped.size()];
    const double cr = cross(p, q);
    ar += cr;
    cx += (p.x + q.x) * cr;
    cy += (p.y + q.y) * cr;
  }
  if (ar == 0.0) return {};
  return {cx / (3.0 * ar), cy / (3.0 * ar)};
}

/// Largest circle about the lobe centre (on the x-axis) that fits inside the given front.
inline double lobe_inradius(const ClosedCurve& c, int side) {
  const Point g = half_centroid(c, side);
  const Point centre{g.x, 0.0};
  if (!c.interior_contains(centre)) return 0.0;
  return c.distance_to(centre);
}

inline TimeseriesRow dumbbell_row(const FlowState& st) {
  TimeseriesRow r;
  r.time = st.time;
  r.min_neck_width = axis_width(st.fronts);
  for (const auto& f : st.fronts) r.total_area += f.area();
  if (st.fronts.size() == 1) {
    r.lobe_inradius_left = lobe_inradius(st.fronts[0], -1);
    r.lobe_inradius_right = lobe_inradius(st.fronts[0], 1);
  } else {
    for (const auto& f : st.fronts) {
      const int side = f.centroid().x < 0.0 ? -1 : 1;
      (side < 0 ? r.lobe_inradius_left : r.lobe_inradius_right) = lobe_inradius(f, side);
    }
  }
  return r;
}

/// Largest distance from a reflected node of `a` to the nearest node of `b`, and vice versa.
inline double mirror_mismatch(const ClosedCurve& a, const ClosedCurve& b) {
  auto one_way = [](const ClosedCurve& p, const ClosedCurve& q) {
    double worst = 0.0;
    for (const auto& x : p.nodes()) {
      const Point r{-x.x, x.y};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q.nodes()) best = std::min(best, distance(r, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  return std::max(one_way(a, b), one_way(b, a));
}

}  // namespace detail

/// Flow of a circle of radius R0 compared against R(t) and the closed-form extinction time.
/// cfg.target_spacing <= 0 selects 2 pi R0 / 512 (512 nodes).
inline ScenarioReport scenario_shrinking_circle(double R0, FracOrder s, FlowConfig cfg,
                                                std::size_t nodes = 512) {
  if (!(R0 > 0.0)) throw DomainError("R0 must be positive");
  if (!(cfg.target_spacing > 0.0)) cfg.target_spacing = 2.0 * std::numbers::pi * R0 / nodes;
  ScenarioReport rep;
  rep.name = "shrinking-circle";
  const BallSpec ball{{}, R0, 2};
  const double T = ball_extinction_time(ball, s, cfg.quad);
  rep.parameters = {{"R0", R0},
                    {"s", s.value()},
                    {"nodes", static_cast<double>(nodes)},
                    {"target_spacing", cfg.target_spacing},
                    {"cfl", cfg.cfl},
                    {"omega_bar", omega_bar(2, s, cfg.quad)},
                    {"extinction_time_closed_form", T}};
  rep.run = run_flow({circle_curve(R0, nodes)}, s, cfg);
  rep.events = rep.run.events;

  double worst = 0.0;
  double worst_t = 0.0;
  for (const auto& st : rep.run.trajectory) {
    TimeseriesRow row;
    row.time = st.time;
    if (!st.fronts.empty()) {
      const auto& f = st.fronts[0];
      double rmin = std::numeric_limits<double>::infinity();
      for (const auto& p : f.nodes()) rmin = std::min(rmin, norm(p));
      row.min_neck_width = 2.0 * rmin;
      row.lobe_inradius_left = row.lobe_inradius_right = rmin;
      row.total_area = f.area();
      const double Re = ball_radius_at(ball, st.time, s, cfg.quad);
      if (Re >= 0.2 * R0) {
        for (const auto& p : f.nodes()) {
          const double dev = std::abs(norm(p) / Re - 1.0);
          if (dev > worst) {
            worst = dev;
            worst_t = st.time;
          }
        }
      }
    }
    rep.timeseries.push_back(row);
  }
  rep.add("radius_trajectory_within_2pct", worst <= 0.02,
          "worst node-wise relative deviation " + std::to_string(worst) + " at t=" +
              std::to_string(worst_t) + " while R(t) >= 0.2 R0");
  double t_ext = -1.0;
  for (const auto& e : rep.events)
    if (e.kind == FlowEvent::Kind::extinction) t_ext = e.time;
  rep.parameters["extinction_time_simulated"] = t_ext;
  const double rel = t_ext > 0.0 ? std::abs(t_ext / T - 1.0) : std::numeric_limits<double>::infinity();
  rep.add("extinction_time_within_3pct", rel <= 0.03,
          "simulated " + std::to_string(t_ext) + " vs closed form " + std::to_string(T));
  bool failure = false;
  for (const auto& e : rep.events)
    if (e.kind == FlowEvent::Kind::truncation ||
        (e.kind == FlowEvent::Kind::accuracy_failure && e.details.rfind("flow step failed", 0) == 0))
      failure = true;
  rep.decide();
  if (failure && rep.verdict != Verdict::reproduced) rep.verdict = Verdict::inconclusive;
  return rep;
}

inline constexpr double kDumbbellSpacing = 0.04;
inline constexpr double kDumbbellRefinement = 8.0;
inline constexpr double kDumbbellRefineHalfwidth = 1.0;

/// The dumbbell neckpinch: parameters from choose_neckpinch_params, flow until the first pinch
/// (or the strip pinch time), then the pinch, containment, symmetry and area assertions.
/// Unset spacing fields of cfg default to h = 0.04, refinement x8 within |x| < 1.
inline ScenarioReport scenario_neckpinch(FracOrder s, FlowConfig cfg) {
  if (!(cfg.target_spacing > 0.0)) cfg.target_spacing = kDumbbellSpacing;
  if (!(cfg.refine_factor > 1.0)) cfg.refine_factor = kDumbbellRefinement;
  if (!(cfg.refine_halfwidth > 0.0)) cfg.refine_halfwidth = kDumbbellRefineHalfwidth;
  ScenarioReport rep;
  rep.name = "neckpinch";
  const auto params = choose_neckpinch_params(2, s, cfg.quad);
  const auto field = cfg.spacing();
  const ClosedCurve dumbbell = build_dumbbell(params, field);
  const double t_strip = strip_pinch_time(params.epsilon0, params.kappa_speed);
  const double t_ball = params.lobe_extinction_time(cfg.quad);
  rep.parameters = {{"s", s.value()},
                    {"kappa_speed", params.kappa_speed},
                    {"epsilon0", params.epsilon0},
                    {"delta", params.delta},
                    {"lobe_radius", params.lobe_radius},
                    {"L", params.L},
                    {"c0_estimate", params.c0_estimate},
                    {"sigma", params.sigma},
                    {"containment_margin", params.containment_margin},
                    {"target_spacing", cfg.target_spacing},
                    {"refine_factor", cfg.refine_factor},
                    {"refine_halfwidth", cfg.refine_halfwidth},
                    {"pinch_factor", cfg.pinch_factor},
                    {"cfl", cfg.cfl},
                    {"nodes", static_cast<double>(dumbbell.size())},
                    {"strip_pinch_time", t_strip},
                    {"lobe_ball_extinction_time", t_ball}};

  const double w0 = detail::axis_width({dumbbell});
  rep.add("initial_neck_width", std::abs(w0 - 2.0 * params.sigma * params.epsilon0) <= 1e-12,
          "neck width " + std::to_string(w0) + " vs 2 sigma eps0 " +
              std::to_string(2.0 * params.sigma * params.epsilon0));
  rep.add("strip_time_before_half_ball_time", t_strip <= 0.5 * t_ball,
          std::to_string(t_strip) + " <= " + std::to_string(0.5 * t_ball));

  StopCondition stop;
  stop.max_time = t_strip;
  stop.on_first_pinch = true;
  rep.run = run_flow({dumbbell}, s, cfg, stop);
  rep.events = rep.run.events;
  for (const auto& st : rep.run.trajectory) rep.timeseries.push_back(detail::dumbbell_row(st));

  std::vector<const FlowEvent*> pinches;
  bool failure = false;
  for (const auto& e : rep.events) {
    if (e.kind == FlowEvent::Kind::pinch) pinches.push_back(&e);
    if (e.kind == FlowEvent::Kind::truncation ||
        (e.kind == FlowEvent::Kind::accuracy_failure && e.details.rfind("flow step failed", 0) == 0))
      failure = true;
  }
  const double h_neck = field.at({});
  const bool one = pinches.size() == 1;
  const double t_pinch = one ? pinches[0]->time : -1.0;
  rep.parameters["t_pinch"] = t_pinch;
  rep.add("exactly_one_pinch", one, std::to_string(pinches.size()) + " pinch events");
  rep.add("pinch_at_neck",
          one && std::abs(pinches[0]->location.x) <= 2.0 * h_neck &&
              std::abs(pinches[0]->location.y) <= params.sigma * params.epsilon0,
          one ? "at (" + std::to_string(pinches[0]->location.x) + ", " +
                    std::to_string(pinches[0]->location.y) + ")"
              : "no single pinch");
  rep.add("pinch_before_strip_time", one && t_pinch <= t_strip,
          std::to_string(t_pinch) + " <= " + std::to_string(t_strip));

  const FlowState& last = rep.run.trajectory.back();
  const double r_ball = one ? ball_radius_at({{}, params.lobe_radius, 2}, t_pinch, s, cfg.quad) : 0.0;
  rep.parameters["ball_radius_at_pinch"] = r_ball;
  bool contains = one && r_ball > 0.0 && last.fronts.size() == 2;
  if (contains) {
    for (int side : {-1, 1}) {
      const auto ball = circle_curve(r_ball, std::max<std::size_t>(64, static_cast<std::size_t>(
                                                                           2.0 * std::numbers::pi * r_ball / h_neck)),
                                     {side * params.L, 0.0});
      bool inside_some = false;
      for (const auto& f : last.fronts) inside_some = inside_some || inclusion_check(ball, f, 0.0);
      contains = contains && inside_some;
    }
  }
  rep.add("fronts_contain_shrunken_lobe_balls", contains,
          "ball radius " + std::to_string(r_ball) + ", fronts " + std::to_string(last.fronts.size()));
  const double mismatch = last.fronts.size() == 2
                              ? detail::mirror_mismatch(last.fronts[0], last.fronts[1])
                              : std::numeric_limits<double>::infinity();
  rep.add("split_fronts_mirror_images", mismatch <= 1e-9,
          "max reflected node mismatch " + std::to_string(mismatch));
  double area = 0.0;
  for (const auto& f : last.fronts) area += f.area();
  const double threshold = 16.0 * cfg.target_spacing * cfg.target_spacing;
  rep.add("area_at_pinch_above_twice_extinction_threshold", one && area >= 2.0 * threshold,
          std::to_string(area) + " >= " + std::to_string(2.0 * threshold));

  // Neck width must be strictly decreasing over the final stretch before the pinch.
  std::vector<double> widths;
  for (const auto& row : rep.timeseries)
    if (row.min_neck_width > 0.0) widths.push_back(row.min_neck_width);
  bool decreasing = widths.size() >= 3;
  for (std::size_t i = widths.size() >= 3 ? widths.size() - 3 : 0; i + 1 < widths.size(); ++i)
    decreasing = decreasing && widths[i + 1] < widths[i];
  rep.add("neck_width_decreasing_before_pinch", decreasing,
          std::to_string(widths.size()) + " pre-pinch widths recorded");

  rep.decide();
  if (failure && rep.verdict != Verdict::reproduced) rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace fmcf
