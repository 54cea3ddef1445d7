#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "fmcf/closed_forms.hpp"
#include "fmcf/curvature.hpp"
#include "fmcf/geometry.hpp"

namespace fmcf {

/// Places `nodes` points at equal arclength along a closed parametric curve p(theta),
/// theta in [0, 2 pi), starting at theta = 0. Arclength is tabulated on a dense grid.
inline ClosedCurve equal_arclength_curve(const std::function<Point(double)>& p, std::size_t nodes) {
  const std::size_t dense = 64 * nodes;
  std::vector<double> cum(dense + 1, 0.0);
  Point prev = p(0.0);
  for (std::size_t j = 1; j <= dense; ++j) {
    const Point q = p(2.0 * std::numbers::pi * static_cast<double>(j) / dense);
    cum[j] = cum[j - 1] + distance(prev, q);
    prev = q;
  }
  const double total = cum[dense];
  std::vector<Point> out;
  out.reserve(nodes);
  std::size_t j = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double target = total * static_cast<double>(i) / nodes;
    while (cum[j + 1] < target) ++j;
    const double frac = (target - cum[j]) / (cum[j + 1] - cum[j]);
    out.push_back(p(2.0 * std::numbers::pi * (static_cast<double>(j) + frac) / dense));
  }
  return ClosedCurve(std::move(out));
}

inline ClosedCurve circle_curve(double R, std::size_t nodes, Point center = {}) {
  return regular_polygon(nodes, R, center);
}

/// Ellipse with semi-axes (a, b), nodes at equal arclength, node 0 at (a, 0).
inline ClosedCurve ellipse_curve(double a, double b, std::size_t nodes, Point center = {}) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("ellipse semi-axes must be positive");
  return equal_arclength_curve(
      [=](double t) { return center + Point{a * std::cos(t), b * std::sin(t)}; }, nodes);
}

/// Axis-aligned rectangle [-hx, hx] x [-hy, hy], counterclockwise from (hx, 0), with corners as
/// nodes and each side split into edges of length at most h.
inline ClosedCurve rectangle_curve(double hx, double hy, double h, Point center = {}) {
  if (!(hx > 0.0 && hy > 0.0 && h > 0.0)) throw DomainError("rectangle sizes must be positive");
  std::vector<Point> p;
  auto side = [&](Point a, Point b) {
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(distance(a, b) / h)));
    for (std::size_t k = 0; k < m; ++k) p.push_back(center + a + (static_cast<double>(k) / m) * (b - a));
  };
  side({hx, 0.0}, {hx, hy});
  side({hx, hy}, {-hx, hy});
  side({-hx, hy}, {-hx, -hy});
  side({-hx, -hy}, {hx, -hy});
  side({hx, -hy}, {hx, 0.0});
  return ClosedCurve(std::move(p));
}

inline ClosedCurve square_curve(double half_side, double h, Point center = {}) {
  return rectangle_curve(half_side, half_side, h, center);
}

/// Polygonal window onto the unbounded band {|y| < f(x)} with the parts beyond |x| = cut
/// replaced by tail corrections.
struct TruncatedBand {
  ClosedCurve curve;
  std::vector<SlabTail> tails;
  std::size_t focus_node = 0;  ///< node at (t_focus, f(t_focus))
};

/// Builds the truncated band {|y| < f(x), |x| < cut} with cut = |t_focus| + reach. Node spacing
/// is h0 near x = t_focus and grows like grading * |x - t_focus| further away. f_sup bounds f
/// from above and is used for the tail error bound. The curve is counterclockwise.
inline TruncatedBand truncated_band(const std::function<double(double)>& f, double f_sup,
                                    double t_focus, double h0, double reach,
                                    double grading = 0.05) {
  if (!(h0 > 0.0 && reach > 0.0 && grading > 0.0)) throw DomainError("invalid band resolution");
  const double cut = std::abs(t_focus) + reach;
  auto step = [&](double t) {
    const double dt = 1e-6 * std::max(1.0, std::abs(t));
    const double slope = (f(t + dt) - f(t - dt)) / (2.0 * dt);
    return std::max(h0, grading * std::abs(t - t_focus)) / std::sqrt(1.0 + slope * slope);
  };
  // Parameter grid: t_focus exactly, marching outward to both cuts.
  std::vector<double> right{t_focus};
  while (right.back() < cut) right.push_back(std::min(cut, right.back() + step(right.back())));
  if (right.size() > 1 && cut - right[right.size() - 2] < 0.3 * step(cut)) right.erase(right.end() - 2);
  std::vector<double> left{t_focus};
  while (left.back() > -cut) left.push_back(std::max(-cut, left.back() - step(left.back())));
  if (left.size() > 1 && left[left.size() - 2] + cut < 0.3 * step(-cut)) left.erase(left.end() - 2);
  std::vector<double> ts(left.rbegin(), left.rend());
  ts.insert(ts.end(), right.begin() + 1, right.end());

  std::vector<Point> p;
  std::size_t focus = 0;
  // Upper boundary right to left.
  for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
    if (*it == t_focus) focus = p.size();
    p.push_back({*it, f(*it)});
  }
  auto cap = [&](double x, double y0, double y1) {
    const double cap_step = std::max(h0, grading * std::abs(x - t_focus));
    const auto m = static_cast<std::size_t>(std::max(2.0, std::ceil(std::abs(y1 - y0) / cap_step)));
    for (std::size_t k = 1; k < m; ++k) p.push_back({x, y0 + (y1 - y0) * static_cast<double>(k) / m});
  };
  cap(-cut, f(-cut), -f(-cut));
  for (double t : ts) p.push_back({t, -f(t)});
  cap(cut, -f(cut), f(cut));

  TruncatedBand band{ClosedCurve(std::move(p)), {}, focus};
  band.tails.push_back({cut, 1, 0.0, f(cut), f_sup});
  band.tails.push_back({-cut, -1, 0.0, f(-cut), f_sup});
  return band;
}

}  // namespace fmcf
