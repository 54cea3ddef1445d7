#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fmcf/errors.hpp"

namespace fmcf {

struct Point {
  double x = 0.0;
  double y = 0.0;

  constexpr Point& operator+=(const Point& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Point& operator-=(const Point& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Point operator+(Point a, const Point& b) { return a += b; }
  friend constexpr Point operator-(Point a, const Point& b) { return a -= b; }
  friend constexpr Point operator-(const Point& a) { return {-a.x, -a.y}; }
  friend constexpr Point operator*(double c, const Point& a) { return {c * a.x, c * a.y}; }
  friend constexpr Point operator*(const Point& a, double c) { return {c * a.x, c * a.y}; }
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

constexpr double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Point& a, const Point& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point& a, const Point& b) { return norm(b - a); }

/// Rotation by -90 degrees. For a counterclockwise tangent this is the outward normal.
constexpr Point rotate_cw(const Point& v) { return {v.y, -v.x}; }
/// Rotation by +90 degrees.
constexpr Point rotate_ccw(const Point& v) { return {-v.y, v.x}; }

inline Point normalized(const Point& v) {
  const double n = norm(v);
  return n > 0.0 ? (1.0 / n) * v : Point{};
}

enum class Orientation { counterclockwise, clockwise };

inline double distance_to_segment(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

namespace detail {

inline int orient_sign(const Point& a, const Point& b, const Point& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int d1 = orient_sign(q1, q2, p1);
  const int d2 = orient_sign(q1, q2, p2);
  const int d3 = orient_sign(p1, p2, q1);
  const int d4 = orient_sign(p1, p2, q2);
  if (d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace detail

/// Oriented polygonal closed curve, implicitly closed (last node connects to the first).
///
/// Counterclockwise node order encloses the set E as the bounded interior. Clockwise order
/// describes the complement, i.e. E is the unbounded exterior. The orientation is derived from
/// the node order, so reversing the nodes swaps E and its complement.
class ClosedCurve {
 public:
  static constexpr std::size_t kMinNodes = 8;

  ClosedCurve() = default;

  explicit ClosedCurve(std::vector<Point> nodes) : nodes_(std::move(nodes)) { validate(); }

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  std::span<const Point> nodes() const noexcept { return nodes_; }
  const Point& operator[](std::size_t i) const { return nodes_[i]; }

  /// Periodic access; any integer index is wrapped onto the node range.
  const Point& at(std::ptrdiff_t i) const { return nodes_[wrap(i)]; }
  std::size_t wrap(std::ptrdiff_t i) const {
    const auto n = static_cast<std::ptrdiff_t>(nodes_.size());
    return static_cast<std::size_t>(((i % n) + n) % n);
  }

  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) a += cross(nodes_[i], at(i + 1));
    return 0.5 * a;
  }
  double area() const { return std::abs(signed_area()); }

  Orientation orientation() const {
    return signed_area() > 0.0 ? Orientation::counterclockwise : Orientation::clockwise;
  }

  double length() const {
    double l = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) l += distance(nodes_[i], at(i + 1));
    return l;
  }

  /// Edge i joins node i to node i+1.
  double edge_length(std::size_t i) const { return distance(nodes_[i], at(i + 1)); }

  Point centroid() const {
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Point& p = nodes_[i];
      const Point& q = at(i + 1);
      const double c = cross(p, q);
      a += c;
      cx += (p.x + q.x) * c;
      cy += (p.y + q.y) * c;
    }
    return {cx / (3.0 * a), cy / (3.0 * a)};
  }

  /// Same point set with the opposite orientation (set <-> complement).
  ClosedCurve reversed() const {
    std::vector<Point> r(nodes_.rbegin(), nodes_.rend());
    // Keep node 0 in place so node indices map as i -> n - i.
    std::rotate(r.rbegin(), r.rbegin() + 1, r.rend());
    return ClosedCurve(std::move(r));
  }

  template <class F>
  ClosedCurve transformed(F&& map) const {
    std::vector<Point> r;
    r.reserve(nodes_.size());
    for (const auto& p : nodes_) r.push_back(map(p));
    return ClosedCurve(std::move(r));
  }

  /// O(N^2) test that no two non-adjacent edges intersect.
  bool is_simple() const {
    const std::size_t n = nodes_.size();
    std::vector<std::array<double, 4>> box(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = nodes_[i];
      const Point& b = at(i + 1);
      box[i] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (box[i][1] < box[j][0] || box[j][1] < box[i][0] || box[i][3] < box[j][2] ||
            box[j][3] < box[i][2])
          continue;
        if (detail::segments_intersect(nodes_[i], at(i + 1), nodes_[j], at(j + 1))) return false;
      }
    }
    return true;
  }

  /// Crossing-number point-in-polygon test for the bounded region (independent of orientation).
  bool interior_contains(const Point& p) const {
    bool inside = false;
    const std::size_t n = nodes_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = nodes_[i];
      const Point& b = nodes_[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < xc) inside = !inside;
      }
    }
    return inside;
  }

  /// Membership in the set E described by the curve (interior if CCW, exterior if CW).
  bool set_contains(const Point& p) const {
    const bool in = interior_contains(p);
    return orientation() == Orientation::counterclockwise ? in : !in;
  }

  double distance_to(const Point& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      d = std::min(d, distance_to_segment(p, nodes_[i], at(i + 1)));
    return d;
  }

 private:
  void validate() const {
    if (nodes_.size() < kMinNodes)
      throw GeometryError("closed curve needs at least " + std::to_string(kMinNodes) +
                          " nodes, got " + std::to_string(nodes_.size()));
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!std::isfinite(nodes_[i].x) || !std::isfinite(nodes_[i].y))
        throw GeometryError("non-finite node " + std::to_string(i));
      if (nodes_[i] == at(i + 1))
        throw GeometryError("consecutive nodes " + std::to_string(i) + " coincide");
    }
    if (signed_area() == 0.0) throw GeometryError("closed curve encloses zero area");
    if (!is_simple()) throw GeometryError("closed curve is not simple");
  }

  std::vector<Point> nodes_;
};

/// Signed curvature of the circle through nodes i-1, i, i+1.
/// Positive where the enclosed set is locally convex; exactly 0 for a collinear triple.
inline double classical_curvature(const ClosedCurve& curve, std::size_t i) {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const Point& a = curve.at(ii - 1);
  const Point& b = curve.at(ii);
  const Point& c = curve.at(ii + 1);
  const double cr = cross(b - a, c - b);
  if (cr == 0.0) return 0.0;
  return 2.0 * cr / (distance(a, b) * distance(b, c) * distance(a, c));
}

/// Unit tangent at node i from the spacing-weighted central difference of its neighbours.
/// Exact for the circle through the three nodes to second order in the spacing.
inline Point node_tangent(const ClosedCurve& curve, std::size_t i) {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const Point dm = curve.at(ii) - curve.at(ii - 1);
  const Point dp = curve.at(ii + 1) - curve.at(ii);
  const double hm = norm(dm);
  const double hp = norm(dp);
  const double w = hm + hp;
  return normalized((hm / (w * hp)) * dp + (hp / (w * hm)) * dm);
}

/// Outward unit normal of E at node i (tangent rotated by -90 degrees).
inline Point node_normal(const ClosedCurve& curve, std::size_t i) {
  return rotate_cw(node_tangent(curve, i));
}

/// Exterior turning angle at node i, in radians, in [0, pi].
inline double exterior_angle(const ClosedCurve& curve, std::size_t i) {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const Point dm = curve.at(ii) - curve.at(ii - 1);
  const Point dp = curve.at(ii + 1) - curve.at(ii);
  return std::abs(std::atan2(cross(dm, dp), dot(dm, dp)));
}

inline double local_spacing(const ClosedCurve& curve, std::size_t i) {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  return 0.5 * (distance(curve.at(ii - 1), curve.at(ii)) + distance(curve.at(ii), curve.at(ii + 1)));
}

}  // namespace fmcf
