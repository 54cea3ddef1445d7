#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "fmcf/curvature.hpp"
#include "fmcf/geometry.hpp"

namespace fmcf {

/// Membership test for a planar set: true iff the point lies in E.
using Indicator = std::function<bool(const Point&)>;

namespace detail {

/// Angles (relative to the tangent direction) at which each ring is sampled: a uniform grid plus
/// geometric clusters approaching the tangent line from both sides, so thin wedges hugging the
/// tangent (e.g. the far side of a slab seen from large radius) are never stepped over.
inline const std::vector<double>& ring_sample_angles() {
  static const std::vector<double> angles = [] {
    constexpr double pi = std::numbers::pi;
    constexpr int uniform = 1024;
    std::vector<double> a;
    for (int j = 0; j < uniform; ++j) a.push_back(-pi + (j + 0.5) * 2.0 * pi / uniform);
    for (int j = 1; j <= 45; ++j) {
      const double d = 0.5 * pi * std::ldexp(1.0, -j);
      a.push_back(d);
      a.push_back(-d);
      a.push_back(pi - d);
      a.push_back(-pi + d);
    }
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  }();
  return angles;
}

/// Angular integral of (chi_{CE} - chi_E) over the circle of radius r about x.
/// Written as the sum over the upper half-ring of chi(phi) + chi(-phi), the tangent-line pairing
/// that realises the principal value; it equals 2 pi - 2 |E on the ring|.
class RingIntegrator {
 public:
  RingIntegrator(const Indicator& inside, Point x, Point tangent, Point normal)
      : inside_(inside), x_(x), tangent_(tangent), normal_(normal) {}

  double operator()(double r) const {
    const auto& phis = ring_sample_angles();
    const std::size_t m = phis.size();
    std::vector<char> in(m);
    for (std::size_t j = 0; j < m; ++j) in[j] = inside_(point(r, phis[j])) ? 1 : 0;

    struct Crossing {
      double angle;
      bool enters;
    };
    std::vector<Crossing> crossings;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t k = (j + 1) % m;
      if (in[j] == in[k]) continue;
      double lo = phis[j];
      double hi = k == 0 ? phis[k] + 2.0 * std::numbers::pi : phis[k];
      for (int it = 0; it < 64 && hi - lo > 4e-16 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((inside_(point(r, mid)) ? 1 : 0) == in[j])
          lo = mid;
        else
          hi = mid;
      }
      crossings.push_back({0.5 * (lo + hi), in[k] == 1});
    }
    if (crossings.empty()) return in[0] ? -2.0 * std::numbers::pi : 2.0 * std::numbers::pi;
    double measure_in = 0.0;
    for (std::size_t j = 0; j < crossings.size(); ++j) {
      if (!crossings[j].enters) continue;
      const std::size_t k = (j + 1) % crossings.size();
      double span = crossings[k].angle - crossings[j].angle;
      if (k <= j) span += 2.0 * std::numbers::pi;
      measure_in += span;
    }
    return 2.0 * std::numbers::pi - 2.0 * measure_in;
  }

  std::size_t crossing_count_hint() const { return 4; }

 private:
  Point point(double r, double phi) const {
    return x_ + r * (std::cos(phi) * tangent_ + std::sin(phi) * normal_);
  }

  const Indicator& inside_;
  Point x_, tangent_, normal_;
};

}  // namespace detail

/// Direct two-dimensional evaluation of H^s_E(x) from the set indicator, used as a test oracle.
///
/// Polar coordinates about x give H = int_0^inf r^(-1-s) A(r) dr with A(r) the ring integral
/// above, which is O(r) for a C^{1,1} boundary. The radial integral runs over dyadic shells
/// from truncation_radius down to r_in = 1e-5 (1 + |x|); the inner disc uses the linear model
/// A(r) ~ A(r_in) r / r_in and the exterior of the truncation radius uses A(r) ~ A(R_T).
/// Both model terms and their variation are folded into error_estimate. Slow by design.
inline CurvatureResult region_curvature_oracle(const Indicator& inside, Point x, Point normal_at_x,
                                               FracOrder s, const QuadConfig& cfg = {}) {
  cfg.validate();
  const double sv = s.value();
  const Point nu = normalized(normal_at_x);
  if (norm(nu) == 0.0) throw GeometryError("oracle normal must be nonzero");
  const Point tau = rotate_ccw(nu);
  const double scale = 1.0 + norm(x);
  const double probe = 1e-9 * scale;
  const bool in_below = inside(x - probe * nu);
  const bool in_above = inside(x + probe * nu);
  if (in_below == in_above)
    throw GeometryError("indicator does not change across the boundary at the evaluation point");
  if (in_above)
    throw GeometryError("normal points into the set; pass the outward normal");

  const detail::RingIntegrator ring(inside, x, tau, nu);
  const double r_out = cfg.truncation_radius;
  const double r_in = std::min(1e-5 * scale, 1e-3 * r_out);

  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  double hi = r_out;
  int shells = 0;
  while (hi > r_in) {
    const double lo = std::max(0.5 * hi, r_in);
    auto f = [&](double u) {
      const double r = std::exp(u);
      return ring(r) * std::exp(-sv * u);
    };
    const auto q = detail::adaptive_integral(f, std::log(lo), std::log(hi), 0.1 * cfg.rel_tol,
                                             cfg.abs_tol * 1e-2, cfg.max_subdivisions);
    value += q.value;
    error += q.error;
    converged = converged && q.converged;
    hi = lo;
    ++shells;
  }

  const double a_in = ring(r_in);
  const double a_in_half = ring(0.5 * r_in);
  const double inner = a_in * std::pow(r_in, -sv) / (1.0 - sv);
  const double inner_alt = 2.0 * a_in_half * std::pow(r_in, -sv) / (1.0 - sv);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double precision = 4.0 * eps * scale * std::pow(r_in, -1.0 - sv) / (1.0 + sv);

  const double a_out = ring(r_out);
  const double a_out_half = ring(0.5 * r_out);
  const double tail = a_out * std::pow(r_out, -sv) / sv;

  CurvatureResult res;
  res.value = value + inner + tail;
  res.tail_correction = tail;
  res.error_estimate = error + std::abs(inner - inner_alt) + precision +
                       std::abs(a_out - a_out_half) * std::pow(r_out, -sv) / sv;
  res.near_field_share = 0.0;
  res.degraded_accuracy = s.degraded();
  if (!converged && error > cfg.rel_tol * std::abs(res.value) + cfg.abs_tol)
    throw AccuracyError("region oracle radial quadrature did not converge", res);
  return res;
}

}  // namespace fmcf
