#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fmcf/curvature.hpp"
#include "fmcf/geometry.hpp"

namespace fmcf {

/// Regular polygon with the given node count inscribed in the circle of radius R about center,
/// counterclockwise, node 0 at angle phase.
inline ClosedCurve regular_polygon(std::size_t nodes, double R = 1.0, Point center = {},
                                   double phase = 0.0) {
  if (!(R > 0.0)) throw DomainError("polygon radius must be positive");
  std::vector<Point> p;
  p.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double t = phase + 2.0 * std::numbers::pi * static_cast<double>(i) / nodes;
    p.push_back(center + R * Point{std::cos(t), std::sin(t)});
  }
  return ClosedCurve(std::move(p));
}

namespace detail {

/// Unit sphere boundary reduction for n >= 3. With x the north pole and y at polar angle theta,
/// |y - x| = 2 sin(theta/2), (y - x).nu(y) = 2 sin^2(theta/2) and dsigma = |S^{n-2}| sin^{n-2}
/// theta dtheta, so the boundary form collapses to
///   (2/s) |S^{n-2}| int_0^pi 2 sin^2(theta/2) (2 sin(theta/2))^(-n-s) sin^{n-2}(theta) dtheta.
/// The integrand behaves like theta^(-s); theta = pi v^(1/(1-s)) makes it smooth.
inline double omega_bar_sphere(int n, double s, const QuadConfig& cfg) {
  const double dn = n;
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * (dn - 1.0)) /
                        boost::math::tgamma(0.5 * (dn - 1.0));
  const double q = 1.0 / (1.0 - s);
  auto f = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double th = std::numbers::pi * std::pow(v, q);
    const double dth = std::numbers::pi * q * std::pow(v, q - 1.0);
    const double h = std::sin(0.5 * th);
    return 2.0 * h * h * std::pow(2.0 * h, -dn - s) * std::pow(std::sin(th), dn - 2.0) * dth;
  };
  const auto r = adaptive_integral(f, 0.0, 1.0, 0.01 * cfg.rel_tol, 0.0, cfg.max_subdivisions);
  return (2.0 / s) * sphere * r.value;
}

/// Polygon values at node counts 256, 512, 1024 extrapolated with the observed order.
inline double omega_bar_plane(double s, const QuadConfig& cfg) {
  double v[3];
  const std::size_t counts[3] = {256, 512, 1024};
  for (int j = 0; j < 3; ++j) v[j] = curve_curvature(regular_polygon(counts[j]), 0, FracOrder(s), cfg).value;
  const double d1 = v[1] - v[0];
  const double d2 = v[2] - v[1];
  if (d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1)) {
    const double ratio = d1 / d2;
    return v[2] + d2 / (ratio - 1.0);
  }
  return v[2];
}

inline std::mutex& omega_cache_mutex() {
  static std::mutex m;
  return m;
}
inline std::map<std::pair<int, double>, double>& omega_cache() {
  static std::map<std::pair<int, double>, double> c;
  return c;
}

}  // namespace detail

/// H^s of the unit ball in R^n at any boundary point.
///
/// n = 2: boundary-integral evaluator on regular polygons with Richardson extrapolation in the
/// node count. n >= 3: one-dimensional polar-angle integral of the boundary form (see
/// detail::omega_bar_sphere). Cached per (n, s); concurrent first calls compute the same value.
inline double omega_bar(int n, FracOrder s, const QuadConfig& cfg = {}) {
  if (n < 2) throw DomainError("omega_bar needs n >= 2, got " + std::to_string(n));
  const auto key = std::make_pair(n, s.value());
  {
    std::lock_guard lock(detail::omega_cache_mutex());
    const auto& c = detail::omega_cache();
    if (auto it = c.find(key); it != c.end()) return it->second;
  }
  const double v = n == 2 ? detail::omega_bar_plane(s, cfg) : detail::omega_bar_sphere(n, s, cfg);
  std::lock_guard lock(detail::omega_cache_mutex());
  return detail::omega_cache().emplace(key, v).first->second;
}

inline double ball_curvature(double R, int n, FracOrder s, const QuadConfig& cfg = {}) {
  if (!(R > 0.0)) throw DomainError("ball radius must be positive");
  return omega_bar(n, s, cfg) * std::pow(R, -s.value());
}

/// C(n, s) = int_{R^{n-1}} (1 + |w|^2)^(-(n+s)/2) dw = pi^((n-1)/2) Gamma((1+s)/2) / Gamma((n+s)/2).
inline double slab_constant(int n, FracOrder s) {
  if (n < 2) throw DomainError("slab constant needs n >= 2");
  const double sv = s.value();
  return std::pow(std::numbers::pi, 0.5 * (n - 1)) * boost::math::tgamma(0.5 * (1.0 + sv)) /
         boost::math::tgamma(0.5 * (n + sv));
}

/// H^s of the slab {|x_n| < a} at a boundary point: 2 C(n, s) (2a)^(-s) / s.
inline double slab_curvature(double a, int n, FracOrder s) {
  if (!(a > 0.0)) throw DomainError("slab half-width must be positive");
  return 2.0 * slab_constant(n, s) * std::pow(2.0 * a, -s.value()) / s.value();
}

}  // namespace fmcf
