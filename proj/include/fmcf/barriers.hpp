#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "fmcf/closed_forms.hpp"
#include "fmcf/curvature.hpp"
#include "fmcf/parallel.hpp"
#include "fmcf/shapes.hpp"

namespace fmcf {

/// The band {|y| < epsilon + (2/pi) arctan(delta x^2)}.
struct StripSpec {
  double epsilon = 0.0;
  double delta = 0.0;

  void validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("strip epsilon must be >= 0");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("strip delta must be >= 0");
  }
};

inline double strip_profile(const StripSpec& spec, double t) {
  return spec.epsilon + (2.0 / std::numbers::pi) * std::atan(spec.delta * t * t);
}

inline double strip_slope(const StripSpec& spec, double t) {
  const double dt2 = spec.delta * t * t;
  return (4.0 / std::numbers::pi) * spec.delta * t / (1.0 + dt2 * dt2);
}

inline double strip_second_derivative(const StripSpec& spec, double t) {
  const double u4 = spec.delta * spec.delta * t * t * t * t;
  return (4.0 / std::numbers::pi) * spec.delta * (1.0 - 3.0 * u4) / ((1.0 + u4) * (1.0 + u4));
}

struct StripBounds {
  double eta = 0.0;         ///< sup |f'| / sqrt(1 + f'^2), the horizontal normal component
  double kappa_geom = 0.0;  ///< sup |f''| / (1 + f'^2)^(3/2)
  double eta_at = 0.0;      ///< maximiser of eta (t >= 0)
  double kappa_at = 0.0;    ///< maximiser of kappa_geom (t >= 0)
};

/// Exact suprema of the boundary slope measure and of the classical curvature magnitude.
/// Both depend on t only through u = sqrt(delta) t, so the search runs over u in [0, 4]
/// (a dense scan followed by Brent refinement); beyond u = 4 both decay monotonically.
inline StripBounds strip_bounds(const StripSpec& spec) {
  spec.validate();
  StripBounds b;
  if (spec.delta == 0.0) return b;
  const double sd = std::sqrt(spec.delta);
  auto eta = [&](double u) {
    const double fp = strip_slope(spec, u / sd);
    return std::abs(fp) / std::sqrt(1.0 + fp * fp);
  };
  auto kappa = [&](double u) {
    const double t = u / sd;
    const double fp = strip_slope(spec, t);
    return std::abs(strip_second_derivative(spec, t)) / std::pow(1.0 + fp * fp, 1.5);
  };
  auto maximise = [](auto&& g) {
    constexpr int grid = 4000;
    constexpr double umax = 4.0;
    int best = 0;
    double best_v = g(0.0);
    for (int j = 1; j <= grid; ++j) {
      const double v = g(umax * j / grid);
      if (v > best_v) {
        best_v = v;
        best = j;
      }
    }
    const double lo = umax * std::max(0, best - 1) / grid;
    const double hi = umax * std::min(grid, best + 1) / grid;
    const auto r = boost::math::tools::brent_find_minima([&](double u) { return -g(u); }, lo, hi, 50);
    return -r.second >= best_v ? std::make_pair(r.first, -r.second)
                               : std::make_pair(umax * best / grid, best_v);
  };
  const auto e = maximise(eta);
  const auto k = maximise(kappa);
  b.eta = e.second;
  b.eta_at = e.first / sd;
  b.kappa_geom = k.second;
  b.kappa_at = k.first / sd;
  return b;
}

namespace detail {
/// Node spacing at the evaluation point for strip curvature evaluation.
inline double strip_spacing(const StripSpec& spec) {
  return std::min(spec.epsilon, 1.0) / 8.0;
}
}  // namespace detail

/// H^s of the strip set at the upper boundary point (t, f(t)). The band is truncated at
/// |t| + truncation_radius and the removed ends enter as tail corrections.
inline CurvatureResult strip_curvature_at(const StripSpec& spec, double t, FracOrder s,
                                          const QuadConfig& cfg = {}, double h0 = 0.0) {
  spec.validate();
  if (!(spec.epsilon > 0.0)) throw DomainError("strip curvature needs epsilon > 0");
  if (!(h0 > 0.0)) h0 = detail::strip_spacing(spec);
  const double sup = spec.delta > 0.0 ? spec.epsilon + 1.0 : spec.epsilon;
  const auto band = truncated_band([&](double x) { return strip_profile(spec, x); }, sup, t, h0,
                                   cfg.truncation_radius);
  return curve_curvature(band.curve, band.focus_node, s, cfg, band.tails);
}

/// Classical curvature of the discretised strip boundary at the waist node (0, epsilon).
inline double strip_waist_classical_curvature(const StripSpec& spec, const QuadConfig& cfg = {}) {
  spec.validate();
  if (!(spec.epsilon > 0.0)) throw DomainError("strip curvature needs epsilon > 0");
  const auto band = truncated_band([&](double x) { return strip_profile(spec, x); },
                                   spec.epsilon + 1.0, 0.0, detail::strip_spacing(spec),
                                   cfg.truncation_radius);
  return classical_curvature(band.curve, band.focus_node);
}

struct StripSample {
  double t = 0.0;
  double value = 0.0;
  double error_estimate = 0.0;
};

struct StripPositivityReport {
  StripSpec spec;
  double s = 0.0;
  double t_max = 0.0;
  std::vector<StripSample> samples;
  double min_value = 0.0;
  double argmin_t = 0.0;
  double max_error = 0.0;    ///< aggregated error: largest per-sample estimate
  double c0_estimate = 0.0;  ///< min_value - max_error
  double waist_classical_curvature = 0.0;
};

/// Far end of the sample grid: the profile has reached 1 - 1e-3 of its total rise, so the set
/// is slab-like beyond it.
inline double strip_sample_extent(const StripSpec& spec) {
  if (spec.delta == 0.0) return 1.0;
  return std::sqrt(std::tan(0.5 * std::numbers::pi * (1.0 - 1e-3)) / spec.delta);
}

/// Samples H^s along the upper boundary at t = 0 and n_samples - 1 geometrically spaced
/// t in [1e-3 T_max, T_max]. Samples run in parallel.
inline StripPositivityReport verify_strip_positivity(const StripSpec& spec, FracOrder s,
                                                     int n_samples = 64,
                                                     const QuadConfig& cfg = {}) {
  spec.validate();
  if (n_samples < 3) throw DomainError("verify_strip_positivity needs at least 3 samples");
  if (!(spec.epsilon > 0.0)) throw DomainError("strip positivity needs epsilon > 0");
  StripPositivityReport rep;
  rep.spec = spec;
  rep.s = s.value();
  rep.t_max = strip_sample_extent(spec);
  rep.samples.resize(static_cast<std::size_t>(n_samples));
  const double t_min = 1e-3 * rep.t_max;
  for (int j = 0; j < n_samples; ++j) {
    double t = 0.0;
    if (j > 0) t = t_min * std::pow(rep.t_max / t_min, static_cast<double>(j - 1) / (n_samples - 2));
    rep.samples[static_cast<std::size_t>(j)].t = t;
  }
  parallel_for(rep.samples.size(), [&](std::size_t j) {
    const auto r = strip_curvature_at(spec, rep.samples[j].t, s, cfg);
    rep.samples[j].value = r.value;
    rep.samples[j].error_estimate = r.error_estimate;
  });
  rep.min_value = rep.samples[0].value;
  rep.argmin_t = rep.samples[0].t;
  for (const auto& smp : rep.samples) {
    if (smp.value < rep.min_value) {
      rep.min_value = smp.value;
      rep.argmin_t = smp.t;
    }
    rep.max_error = std::max(rep.max_error, smp.error_estimate);
  }
  rep.c0_estimate = rep.min_value - rep.max_error;
  rep.waist_classical_curvature = strip_waist_classical_curvature(spec, cfg);
  return rep;
}

struct BallSpec {
  Point center;
  double R0 = 1.0;
  int n = 2;

  void validate() const {
    if (!(R0 > 0.0)) throw DomainError("ball radius must be positive");
    if (n < 2) throw DomainError("ball dimension must be >= 2");
  }
};

inline double ball_extinction_time(const BallSpec& spec, FracOrder s, const QuadConfig& cfg = {}) {
  spec.validate();
  const double sv = s.value();
  return std::pow(spec.R0, sv + 1.0) / (omega_bar(spec.n, s, cfg) * (sv + 1.0));
}

/// R(t) = (R0^(s+1) - omega_bar (1+s) t)^(1/(s+1)), 0 from the extinction time on.
inline double ball_radius_at(const BallSpec& spec, double t, FracOrder s, const QuadConfig& cfg = {}) {
  spec.validate();
  if (!(t >= 0.0)) throw DomainError("time must be >= 0");
  const double sv = s.value();
  const double base = std::pow(spec.R0, sv + 1.0) - omega_bar(spec.n, s, cfg) * (1.0 + sv) * t;
  return base > 0.0 ? std::pow(base, 1.0 / (sv + 1.0)) : 0.0;
}

/// Waist closing time of the moving strip, 2 epsilon0 / kappa as stated for the construction.
inline double strip_pinch_time(double epsilon0, double kappa_speed) {
  if (!(epsilon0 > 0.0) || !(kappa_speed > 0.0))
    throw DomainError("strip_pinch_time needs positive epsilon0 and kappa_speed");
  return 2.0 * epsilon0 / kappa_speed;
}

/// Raised when no admissible neckpinch parameter set exists; lists every violated constraint.
class InfeasibleError : public DomainError {
 public:
  explicit InfeasibleError(std::vector<std::string> violations)
      : DomainError(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "infeasible neckpinch parameters:";
    for (const auto& s : v) out += " [" + s + "]";
    return out;
  }
  std::vector<std::string> violations_;
};

struct NeckpinchParams {
  double kappa_speed = 0.0;
  double epsilon0 = 0.0;
  double delta = 0.0;
  double lobe_radius = 0.0;
  double L = 0.0;
  double c0_estimate = 0.0;
  double s = 0.5;
  double sigma = 0.8;              ///< neck shrink factor for the dumbbell
  double containment_margin = 0.0;

  StripSpec strip() const { return {epsilon0, delta}; }

  double lobe_extinction_time(const QuadConfig& cfg = {}) const {
    return ball_extinction_time({{}, lobe_radius, 2}, FracOrder(s), cfg);
  }

  std::vector<std::string> violations(const QuadConfig& cfg = {}) const {
    std::vector<std::string> v;
    if (!(epsilon0 > 0.0)) v.push_back("epsilon0 > 0");
    if (!(lobe_radius > 0.0 && lobe_radius <= 1.0)) v.push_back("0 < lobe_radius <= 1");
    if (!(sigma > 0.0 && sigma < 1.0)) v.push_back("0 < sigma < 1");
    if (!(kappa_speed > 0.0 && kappa_speed < c0_estimate)) v.push_back("0 < kappa_speed < c0_estimate");
    if (!v.empty()) return v;
    const double bound = 0.25 * kappa_speed * lobe_extinction_time(cfg);
    if (!(epsilon0 < bound))
      v.push_back("epsilon0 < kappa_speed T_ball(lobe_radius) / 4 (" + std::to_string(epsilon0) +
                  " vs " + std::to_string(bound) + ")");
    if (!(lobe_radius + containment_margin <= strip_profile(strip(), L - lobe_radius)))
      v.push_back("lobe_radius + margin <= strip half-width at L - lobe_radius");
    return v;
  }

  void validate(const QuadConfig& cfg = {}) const {
    if (auto v = violations(cfg); !v.empty()) throw InfeasibleError(std::move(v));
  }
};

/// Positive margin certifies the strip moving inward at kappa_speed as a supersolution.
/// The minimum curvature over the family is attained at the initial (widest) strip.
inline double supersolution_margin(const NeckpinchParams& params, FracOrder s,
                                   const QuadConfig& cfg = {}, int n_samples = 64) {
  return verify_strip_positivity(params.strip(), s, n_samples, cfg).c0_estimate -
         params.kappa_speed;
}

namespace detail {

/// Distance from (L, 0) to the graph of the neck profile over t in [0, L], with the
/// closest abscissa.
inline std::pair<double, double> axis_distance_to_profile(const StripSpec& g, double L) {
  auto d2 = [&](double t) {
    const double y = strip_profile(g, t);
    return (t - L) * (t - L) + y * y;
  };
  constexpr int grid = 2000;
  int best = 0;
  double best_v = d2(0.0);
  for (int j = 1; j <= grid; ++j) {
    const double v = d2(L * j / grid);
    if (v < best_v) {
      best_v = v;
      best = j;
    }
  }
  const double lo = L * std::max(0, best - 1) / grid;
  const double hi = L * std::min(grid, best + 1) / grid;
  const auto r = boost::math::tools::brent_find_minima(d2, lo, hi, 50);
  return r.second < best_v ? std::make_pair(std::sqrt(r.second), r.first)
                           : std::make_pair(std::sqrt(best_v), L * best / grid);
}

}  // namespace detail

inline constexpr double kDefaultLobeRadius = 0.75;
inline constexpr double kDefaultSigma = 0.8;
inline constexpr double kMaxLobeOffset = 4.0;

/// Smallest lobe offset L for which both the strip containment invariant holds and the lobe
/// circle drawn tangent to the shrunken neck profile has radius >= lobe_radius + margin.
inline double minimal_lobe_offset(const StripSpec& strip, double lobe_radius, double margin,
                                  double sigma) {
  const double rise = lobe_radius + margin - strip.epsilon;
  if (!(strip.delta > 0.0) || !(rise < 1.0)) return std::numeric_limits<double>::infinity();
  double L = lobe_radius;
  if (rise > 0.0) L += std::sqrt(std::tan(0.5 * std::numbers::pi * rise) / strip.delta);
  const StripSpec neck{sigma * strip.epsilon, strip.delta};
  auto ok = [&](double x) {
    return detail::axis_distance_to_profile(neck, x).first >= lobe_radius + margin;
  };
  if (ok(L)) return L;
  double lo = L;
  double hi = 2.0 * L;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Deterministic parameter search. For delta in {0.05, 0.1, 0.2, 0.5, 1}: starting from
/// epsilon0 = 0.1, estimate c0, set kappa = c0/2 and shrink epsilon0 to 0.8 of the bound
/// kappa T_ball(lobe_radius)/4 until it holds; then take the minimal lobe offset. The first
/// delta whose offset is at most kMaxLobeOffset is returned.
inline NeckpinchParams choose_neckpinch_params(int n, FracOrder s, const QuadConfig& cfg = {}) {
  if (n != 2) throw DomainError("neckpinch parameters are only constructed for n = 2");
  const double lobe = kDefaultLobeRadius;
  const double margin = 0.05 * lobe;
  const double t_ball = ball_extinction_time({{}, lobe, 2}, s, cfg);
  std::vector<std::string> reasons;
  for (double delta : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    double eps0 = 0.1;
    double c0 = 0.0;
    bool ok = false;
    for (int it = 0; it < 20; ++it) {
      c0 = verify_strip_positivity({eps0, delta}, s, 64, cfg).c0_estimate;
      if (!(c0 > 0.0)) break;
      const double bound = 0.25 * 0.5 * c0 * t_ball;
      if (eps0 < bound) {
        ok = true;
        break;
      }
      eps0 = 0.8 * bound;
    }
    if (!ok) {
      reasons.push_back("delta=" + std::to_string(delta) + ": no epsilon0 with positive c0 below the ball-time bound");
      continue;
    }
    const double L = minimal_lobe_offset({eps0, delta}, lobe, margin, kDefaultSigma);
    if (!(L <= kMaxLobeOffset)) {
      reasons.push_back("delta=" + std::to_string(delta) + ": lobe offset " + std::to_string(L) +
                        " exceeds " + std::to_string(kMaxLobeOffset));
      continue;
    }
    NeckpinchParams p;
    p.kappa_speed = 0.5 * c0;
    p.epsilon0 = eps0;
    p.delta = delta;
    p.lobe_radius = lobe;
    p.L = L;
    p.c0_estimate = c0;
    p.s = s.value();
    p.sigma = kDefaultSigma;
    p.containment_margin = margin;
    p.validate(cfg);
    return p;
  }
  throw InfeasibleError(std::move(reasons));
}

}  // namespace fmcf
