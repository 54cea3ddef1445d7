#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fmcf/errors.hpp"
#include "fmcf/geometry.hpp"
#include "fmcf/parallel.hpp"

namespace fmcf {

/// Fractional order s in (0, 1).
class FracOrder {
 public:
  static constexpr double kSupportedMin = 0.05;
  static constexpr double kSupportedMax = 0.95;

  explicit FracOrder(double s) : s_(s) {
    if (!(s > 0.0 && s < 1.0))
      throw DomainError("fractional order s must lie in (0, 1), got " + std::to_string(s));
  }
  double value() const noexcept { return s_; }
  operator double() const noexcept { return s_; }  // NOLINT(google-explicit-constructor)

  /// Outside [0.05, 0.95] results are still produced but flagged as degraded.
  bool degraded() const noexcept { return s_ < kSupportedMin || s_ > kSupportedMax; }

 private:
  double s_;
};

struct QuadConfig {
  double rel_tol = 1e-4;
  double abs_tol = 1e-8;
  /// Near-field radius as a multiple of the local node spacing.
  double near_field_radius_factor = 4.0;
  /// Length at which unbounded sets are truncated; also the outer radius of the region oracle.
  double truncation_radius = 1e4;
  /// Maximum bisection depth of each adaptive integral.
  int max_subdivisions = 15;

  void validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
    if (!(abs_tol > 0.0)) throw DomainError("abs_tol must be positive");
    if (!(near_field_radius_factor > 0.0))
      throw DomainError("near_field_radius_factor must be positive");
    if (!(truncation_radius > 0.0)) throw DomainError("truncation_radius must be positive");
    if (max_subdivisions < 1) throw DomainError("max_subdivisions must be at least 1");
  }
};

struct CurvatureResult {
  double value = 0.0;           ///< H^s at the point, units length^(-s)
  double error_estimate = 0.0;  ///< >= 0, same units; quadrature + near-field model + tail + roundoff
  double near_field_share = 0.0;
  double tail_correction = 0.0;
  bool degraded_accuracy = false;  ///< s outside the supported range
  bool corner_warning = false;     ///< evaluated at a node with exterior angle above 30 degrees
};

/// Raised when an adaptive integral fails to converge within max_subdivisions.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, CurvatureResult partial)
      : std::runtime_error(what), partial_(partial) {}
  const CurvatureResult& partial() const noexcept { return partial_; }

 private:
  CurvatureResult partial_;
};

/// Part of an unbounded set removed by truncation: the band
/// {direction * (x - cut_x) > 0, |y - center_y| < half_width}. The true set lies between this band
/// and the wider band of max_half_width, which bounds the correction error.
struct SlabTail {
  double cut_x = 0.0;
  int direction = 1;
  double center_y = 0.0;
  double half_width = 0.0;
  double max_half_width = 0.0;
};

namespace detail {

inline constexpr double kCornerAngle = std::numbers::pi / 6.0;

struct QuadValue {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature: the panel with the largest error estimate is
/// bisected until the summed estimate meets max(rel_tol |I|, abs_floor). Panels that reach
/// max_depth bisections are frozen and their error still counts; at most 64 max_depth splits. An infinite upper limit is handed to
/// the Boost routine, which maps it onto a finite interval.
template <class F>
QuadValue adaptive_integral(F&& f, double a, double b, double rel_tol, double abs_floor,
                            int max_depth) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (std::isinf(b)) {
    double err = 0.0;
    const double v = GK::integrate(f, a, b, static_cast<unsigned>(max_depth), rel_tol, &err);
    return {v, err, std::isfinite(v) && (err <= rel_tol * std::abs(v) || err <= abs_floor)};
  }
  struct Panel {
    double a, b, value, error;
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
  auto panel = [&](double lo, double hi, int depth) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double f0 = f(c);
    double kr = wk[0] * f0;
    double gr = wg[0] * f0;
    for (std::size_t j = 1; j < xk.size(); ++j) {
      const double pair = f(c - h * xk[j]) + f(c + h * xk[j]);
      kr += wk[j] * pair;
      if (j % 2 == 0) gr += wg[j / 2] * pair;
    }
    return Panel{lo, hi, h * kr, std::abs(h * (kr - gr)), depth};
  };
  std::priority_queue<Panel> open;
  open.push(panel(a, b, 0));
  double value = open.top().value;
  double error = open.top().error;
  auto target = [&] { return std::max(rel_tol * std::abs(value), abs_floor); };
  const int max_splits = 64 * max_depth;
  for (int splits = 0; !open.empty() && error > target() && splits < max_splits; ++splits) {
    const Panel p = open.top();
    open.pop();
    if (p.depth >= max_depth) continue;
    const double mid = 0.5 * (p.a + p.b);
    const Panel l = panel(p.a, mid, p.depth + 1);
    const Panel r = panel(mid, p.b, p.depth + 1);
    value += l.value + r.value - p.value;
    error += l.error + r.error - p.error;
    open.push(l);
    open.push(r);
  }
  const bool ok = std::isfinite(value) && error <= target();
  return {value, error, ok};
}

/// Integral over t >= D of  t^(-1-s) * int_{atan(lo/t)}^{atan(hi/t)} cos^s(theta) d theta,
/// i.e. the kernel |y|^(-2-s) over a half-infinite band {t > D, lo < v < hi}.
inline QuadValue band_integral(double D, double lo, double hi, double s, double rel_tol,
                               int max_depth) {
  if (hi <= lo) return {};
  auto inner = [&](double t) {
    const double t1 = std::atan2(lo, t);
    const double t2 = std::atan2(hi, t);
    const auto q = adaptive_integral([&](double th) { return std::pow(std::cos(th), s); }, t1, t2,
                                     rel_tol * 0.1, 0.0, max_depth);
    return std::pow(t, -1.0 - s) * q.value;
  };
  return adaptive_integral(inner, D, std::numeric_limits<double>::infinity(), rel_tol, 0.0,
                           max_depth);
}

}  // namespace detail

/// Boundary-integral evaluator of the fractional mean curvature
///
///   H^s_E(x) = PV int (chi_{CE}(y) - chi_E(y)) / |x - y|^(2+s) dy
///            = (2/s) int_{dE} ((y - x) . nu(y)) / |y - x|^(2+s) dsigma(y),
///
/// which follows from div_y[(y - x)/|y - x|^(2+s)] = -s |y - x|^(-2-s). Nodes are treated as samples
/// of a C^{1,1} curve: each far edge is the parabolic arc through its end nodes carrying the mean
/// of their circumscribed-circle curvatures (zero at corner nodes), and within
/// r0 = near_field_radius_factor * local spacing of the evaluation node the two adjacent arcs are
/// replaced by the osculating parabola, whose contribution is integrated in closed form up to a
/// smooth 1-D quadrature. Leading order of that term is 2 k r0^(1-s) / (s (1 - s)).
///
/// The curve is copied; construction is O(N), each evaluation O(N).
class CurvatureEvaluator {
 public:
  CurvatureEvaluator(ClosedCurve curve, FracOrder s, QuadConfig cfg = {},
                     std::vector<SlabTail> tails = {})
      : curve_(std::move(curve)), s_(s), cfg_(cfg), tails_(std::move(tails)) {
    cfg_.validate();
    const std::size_t n = curve_.size();
    node_k_.resize(n);
    corner_.resize(n);
    edge_beta_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      node_k_[i] = classical_curvature(curve_, i);
      corner_[i] = exterior_angle(curve_, i) > detail::kCornerAngle;
    }
    for (std::size_t e = 0; e < n; ++e) {
      const std::size_t f = curve_.wrap(static_cast<std::ptrdiff_t>(e) + 1);
      const double ke = 0.5 * ((corner_[e] ? 0.0 : node_k_[e]) + (corner_[f] ? 0.0 : node_k_[f]));
      edge_beta_[e] = 0.5 * ke * curve_.edge_length(e);
    }
  }

  const ClosedCurve& curve() const noexcept { return curve_; }
  FracOrder order() const noexcept { return s_; }
  const QuadConfig& config() const noexcept { return cfg_; }

  CurvatureResult at(std::size_t i) const {
    const std::size_t n = curve_.size();
    if (i >= n) throw std::out_of_range("node index out of range");
    const double s = s_.value();
    const Point x = curve_[i];
    const Point tau = node_tangent(curve_, i);
    const double k = node_k_[i];
    const double h = local_spacing(curve_, i);
    const double r0 = cfg_.near_field_radius_factor * h;
    const double edge_tol = 0.1 * cfg_.rel_tol;
    const double edge_floor = cfg_.abs_tol / static_cast<double>(n);

    const NearRange full = near_range(i, r0, tau);
    const NearRange half = near_range(i, 0.5 * r0, tau);

    double unconverged_error = 0.0;
    double quad_error = 0.0;
    double abs_sum = 0.0;
    double far = 0.0;
    double band = 0.0;

    const auto ii = static_cast<std::ptrdiff_t>(i);
    const std::ptrdiff_t first_far = ii + static_cast<std::ptrdiff_t>(full.forward);
    const std::ptrdiff_t last_far = ii + static_cast<std::ptrdiff_t>(n) -
                                    static_cast<std::ptrdiff_t>(full.backward);
    for (std::ptrdiff_t e = first_far; e < last_far; ++e) {
      const auto q = edge_integral(curve_.wrap(e), x, edge_tol, edge_floor);
      far += q.value;
      abs_sum += std::abs(q.value);
      quad_error += q.error;
      if (!q.converged) unconverged_error += q.error;
    }
    // Edges inside the full near range but outside the half range.
    for (std::size_t m = half.forward; m < full.forward; ++m) {
      const auto q = edge_integral(curve_.wrap(ii + static_cast<std::ptrdiff_t>(m)), x, edge_tol,
                                   edge_floor);
      band += q.value;
      quad_error += q.error;
      if (!q.converged) unconverged_error += q.error;
    }
    for (std::size_t m = half.backward; m < full.backward; ++m) {
      const auto q = edge_integral(curve_.wrap(ii - static_cast<std::ptrdiff_t>(m) - 1), x,
                                   edge_tol, edge_floor);
      band += q.value;
      quad_error += q.error;
      if (!q.converged) unconverged_error += q.error;
    }

    const auto near_full = near_field(k, full.back_extent, full.forward_extent);
    const auto near_half = near_field(k, half.back_extent, half.forward_extent);
    quad_error = (2.0 / s) * quad_error + near_full.error;
    unconverged_error *= 2.0 / s;
    if (!near_full.converged) unconverged_error += near_full.error;

    double tail = 0.0;
    double tail_error = 0.0;
    for (const auto& t : tails_) {
      const double D = t.direction * (t.cut_x - x.x);
      if (!(D > 0.0)) throw GeometryError("evaluation point lies beyond a truncation cut");
      const double lo = t.center_y - t.half_width - x.y;
      const double hi = t.center_y + t.half_width - x.y;
      const auto inner = detail::band_integral(D, lo, hi, s, cfg_.rel_tol, cfg_.max_subdivisions);
      const auto wide =
          detail::band_integral(D, t.center_y - t.max_half_width - x.y,
                                t.center_y + t.max_half_width - x.y, s, cfg_.rel_tol,
                                cfg_.max_subdivisions);
      // The removed band belongs to E but is outside the curve: it was counted with +1 instead of -1.
      tail -= 2.0 * inner.value;
      tail_error += 2.0 * std::abs(wide.value - inner.value) + 2.0 * (inner.error + wide.error);
    }

    const double value = (2.0 / s) * far + near_full.value + tail;
    const double value_half = (2.0 / s) * (far + band) + near_half.value + tail;

    CurvatureResult r;
    r.value = value;
    const double near_abs = std::abs(near_full.value);
    const double denom = near_abs + (2.0 / s) * abs_sum;
    // Summation roundoff: n eps sum |terms|.
    const double roundoff = std::numeric_limits<double>::epsilon() * static_cast<double>(n) * denom;
    r.error_estimate = quad_error + 2.0 * std::abs(value - value_half) + tail_error + roundoff;
    r.near_field_share = denom > 0.0 ? near_abs / denom : 0.0;
    r.tail_correction = tail;
    r.degraded_accuracy = s_.degraded();
    r.corner_warning = corner_[i];
    if (unconverged_error > cfg_.rel_tol * std::abs(value) + cfg_.abs_tol)
      throw AccuracyError("curvature quadrature did not converge at node " + std::to_string(i), r);
    return r;
  }

  /// Evaluates every node, in parallel across nodes.
  std::vector<CurvatureResult> all() const {
    std::vector<CurvatureResult> out(curve_.size());
    parallel_for(curve_.size(), [&](std::size_t i) { out[i] = at(i); });
    return out;
  }

 private:
  struct NearRange {
    std::size_t forward = 1;   ///< number of edges ahead of the node inside the range
    std::size_t backward = 1;  ///< number of edges behind the node inside the range
    double forward_extent = 0.0;
    double back_extent = 0.0;
  };

  NearRange near_range(std::size_t i, double radius, const Point& tau) const {
    const std::size_t n = curve_.size();
    const std::size_t m_max = (n - 2) / 2;
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const Point& x = curve_[i];
    NearRange r;
    // Exact ties (uniform spacing, radius a multiple of it) resolve the same way at every node.
    const double reach = radius * (1.0 - 1e-9);
    double len = 0.0;
    std::size_t m = 0;
    while (m < m_max && len < reach) {
      len += curve_.edge_length(curve_.wrap(ii + static_cast<std::ptrdiff_t>(m)));
      ++m;
    }
    while (m > 1 && dot(curve_.at(ii + static_cast<std::ptrdiff_t>(m)) - x, tau) <= 0.0) --m;
    r.forward = m;
    r.forward_extent = dot(curve_.at(ii + static_cast<std::ptrdiff_t>(m)) - x, tau);

    len = 0.0;
    m = 0;
    while (m < m_max && len < reach) {
      len += curve_.edge_length(curve_.wrap(ii - static_cast<std::ptrdiff_t>(m) - 1));
      ++m;
    }
    while (m > 1 && dot(x - curve_.at(ii - static_cast<std::ptrdiff_t>(m)), tau) <= 0.0) --m;
    r.backward = m;
    r.back_extent = dot(x - curve_.at(ii - static_cast<std::ptrdiff_t>(m)), tau);
    if (!(r.forward_extent > 0.0) || !(r.back_extent > 0.0))
      throw GeometryError("near field of node " + std::to_string(i) +
                          " folds back; curve is under-resolved");
    return r;
  }

  /// int over edge e of ((y - x) . nu) |y - x|^(-2-s) dsigma on the parabolic arc model.
  detail::QuadValue edge_integral(std::size_t e, const Point& x, double rel_tol,
                                  double abs_floor) const {
    const Point a = curve_[e];
    const Point c = curve_.at(static_cast<std::ptrdiff_t>(e) + 1) - a;
    const Point ne = rotate_cw(c);
    const double beta = edge_beta_[e];
    const double p = -1.0 - 0.5 * s_.value();
    auto f = [&](double u) {
      const double w = u * (1.0 - u);
      const Point d = (a - x) + u * c + (beta * w) * ne;
      const Point dp = c + (beta * (1.0 - 2.0 * u)) * ne;
      return dot(d, rotate_cw(dp)) * std::pow(dot(d, d), p);
    };
    return detail::adaptive_integral(f, 0.0, 1.0, rel_tol, abs_floor, cfg_.max_subdivisions);
  }

  /// (k/s) [F(a) + F(b)] with F(c) = int_0^c t^(-s) (1 + k^2 t^2 / 4)^(-1-s/2) dt, evaluated
  /// after t = c v^(1/(1-s)), which removes the endpoint singularity.
  detail::QuadValue near_field(double k, double back, double forward) const {
    if (k == 0.0) return {};
    const double s = s_.value();
    const double q = 2.0 / (1.0 - s);
    const double p = -1.0 - 0.5 * s;
    auto F = [&](double c) {
      const double kc2 = 0.25 * k * k * c * c;
      auto g = [&](double v) { return std::pow(1.0 + kc2 * std::pow(v, q), p); };
      auto r = detail::adaptive_integral(g, 0.0, 1.0, 0.01 * cfg_.rel_tol, 0.0,
                                         cfg_.max_subdivisions);
      const double scale = std::pow(c, 1.0 - s) / (1.0 - s);
      r.value *= scale;
      r.error *= scale;
      return r;
    };
    const auto fa = F(back);
    const auto fb = F(forward);
    return {(k / s) * (fa.value + fb.value), std::abs(k / s) * (fa.error + fb.error),
            fa.converged && fb.converged};
  }

  ClosedCurve curve_;
  FracOrder s_;
  QuadConfig cfg_;
  std::vector<SlabTail> tails_;
  std::vector<double> node_k_;
  std::vector<bool> corner_;
  std::vector<double> edge_beta_;
};

/// H^s of the set enclosed by the curve (or its complement, for clockwise curves) at a node.
inline CurvatureResult curve_curvature(const ClosedCurve& curve, std::size_t node_index,
                                       FracOrder s, const QuadConfig& cfg = {},
                                       std::vector<SlabTail> tails = {}) {
  return CurvatureEvaluator(curve, s, cfg, std::move(tails)).at(node_index);
}

}  // namespace fmcf
