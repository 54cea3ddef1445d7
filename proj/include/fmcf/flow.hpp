#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <numbers>
#include <vector>

#include "fmcf/curvature.hpp"
#include "fmcf/geometry.hpp"

namespace fmcf {

/// Target node spacing as a function of position: h away from the refinement band
/// |x| < refine_halfwidth, decreasing linearly to h / refine_factor on the y-axis.
struct SpacingField {
  double h = 0.0;
  double refine_factor = 1.0;
  double refine_halfwidth = 0.0;

  double at(const Point& p) const {
    if (refine_factor <= 1.0 || refine_halfwidth <= 0.0) return h;
    const double inv = 1.0 / refine_factor;
    return h * (inv + (1.0 - inv) * std::min(1.0, std::abs(p.x) / refine_halfwidth));
  }
};

struct FlowConfig {
  double cfl = 0.1;
  double target_spacing = 0.0;
  double pinch_factor = 3.0;
  int max_steps = 100000;
  QuadConfig quad;
  double refine_factor = 1.0;
  double refine_halfwidth = 0.0;
  int max_retries = 5;
  /// Bound on dt times the sawtooth damping rate; explicit Euler needs < 2.
  double stability = 1.0;

  SpacingField spacing() const { return {target_spacing, refine_factor, refine_halfwidth}; }

  void validate() const {
    if (!(cfl > 0.0 && cfl < 1.0)) throw DomainError("cfl must lie in (0, 1)");
    if (!(target_spacing > 0.0)) throw DomainError("target_spacing must be positive");
    if (!(pinch_factor >= 2.0)) throw DomainError("pinch_factor must be >= 2");
    if (max_steps < 1) throw DomainError("max_steps must be >= 1");
    if (!(refine_factor >= 1.0)) throw DomainError("refine_factor must be >= 1");
    if (!(refine_halfwidth >= 0.0)) throw DomainError("refine_halfwidth must be >= 0");
    if (max_retries < 0) throw DomainError("max_retries must be >= 0");
    if (!(stability > 0.0 && stability < 2.0)) throw DomainError("stability must lie in (0, 2)");
    quad.validate();
  }
};

struct FlowEvent {
  enum class Kind { pinch, split, extinction, accuracy_failure, truncation };
  Kind kind = Kind::pinch;
  double time = 0.0;
  Point location;
  std::string details;
};

inline const char* to_string(FlowEvent::Kind k) {
  switch (k) {
    case FlowEvent::Kind::pinch: return "pinch";
    case FlowEvent::Kind::split: return "split";
    case FlowEvent::Kind::extinction: return "extinction";
    case FlowEvent::Kind::accuracy_failure: return "accuracy_failure";
    case FlowEvent::Kind::truncation: return "truncation";
  }
  return "unknown";
}

struct FlowState {
  double time = 0.0;
  std::vector<ClosedCurve> fronts;
  double target_spacing = 0.0;
  int step_count = 0;
  double last_dt = 0.0;
  /// Node curvatures of each front at `time`; empty entries are recomputed on demand.
  std::vector<std::vector<double>> curvature;
};

/// Redistributes nodes so that each edge spans about one local target spacing. Node 0 is kept
/// in place; the new node count is a multiple of 4 (at least 8), so a mirror-symmetric input
/// with node 0 on a symmetry axis stays symmetric up to round-off. Positions come from the cubic
/// Hermite interpolant with Catmull-Rom tangents in the chord-length parameter.
inline ClosedCurve resample(const ClosedCurve& curve, const SpacingField& field) {
  if (!(field.h > 0.0)) throw DomainError("resample needs a positive target spacing");
  const std::size_t n = curve.size();
  std::vector<double> len(n), warp(n + 1, 0.0), sigma(n + 1, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    len[e] = curve.edge_length(e);
    const Point mid = 0.5 * (curve[e] + curve.at(static_cast<std::ptrdiff_t>(e) + 1));
    sigma[e + 1] = sigma[e] + len[e];
    warp[e + 1] = warp[e] + len[e] / field.at(mid);
  }
  const double total = warp[n];
  if (total < 4.0)
    throw TooSmallError("curve of length " + std::to_string(sigma[n]) +
                        " is below 8 half target spacings");
  const auto m = std::max<std::size_t>(8, 4 * static_cast<std::size_t>(std::llround(total / 4.0)));

  auto tangent = [&](std::size_t i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double span = len[curve.wrap(ii - 1)] + len[i % n];
    return (1.0 / span) * (curve.at(ii + 1) - curve.at(ii - 1));
  };
  std::vector<Point> out;
  out.reserve(m);
  out.push_back(curve[0]);
  std::size_t e = 0;
  for (std::size_t j = 1; j < m; ++j) {
    const double w = total * static_cast<double>(j) / static_cast<double>(m);
    while (e + 1 < n && warp[e + 1] <= w) ++e;
    const double u = std::clamp((w - warp[e]) / (warp[e + 1] - warp[e]), 0.0, 1.0);
    const Point& p0 = curve[e];
    const Point& p1 = curve.at(static_cast<std::ptrdiff_t>(e) + 1);
    const Point t0 = len[e] * tangent(e);
    const Point t1 = len[e] * tangent((e + 1) % n);
    const double u2 = u * u;
    const double u3 = u2 * u;
    out.push_back((2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * t0 + (-2 * u3 + 3 * u2) * p1 +
                  (u3 - u2) * t1);
  }
  return ClosedCurve(std::move(out));
}

inline ClosedCurve resample(const ClosedCurve& curve, double target_spacing) {
  return resample(curve, SpacingField{target_spacing});
}

namespace detail {

inline std::vector<double> node_curvatures(const ClosedCurve& c, FracOrder s, const QuadConfig& q) {
  const auto res = CurvatureEvaluator(c, s, q).all();
  std::vector<double> h(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) h[i] = res[i].value;
  return h;
}

inline double extinction_area(const FlowConfig& cfg) {
  return 16.0 * cfg.target_spacing * cfg.target_spacing;
}

/// K such that the discrete operator damps a node-to-node sawtooth of spacing h at rate
/// K h^-(1+s): measured once on a perturbed regular 512-gon and cached per (s, config).
inline double sawtooth_stiffness(FracOrder s, const QuadConfig& q) {
  static std::mutex m;
  static std::map<std::array<double, 3>, double> cache;
  const std::array<double, 3> key{s.value(), q.near_field_radius_factor, q.rel_tol};
  {
    std::lock_guard lock(m);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  constexpr std::size_t n = 512;
  const double h = 2.0 * std::sin(std::numbers::pi / n);
  const double amp = 1e-4 * h;
  std::vector<Point> base(n), bumped(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
    base[i] = {std::cos(th), std::sin(th)};
    bumped[i] = (1.0 + (i % 2 == 0 ? amp : -amp)) * base[i];
  }
  const double h0 = curve_curvature(ClosedCurve(base), 0, s, q).value;
  const double h1 = curve_curvature(ClosedCurve(bumped), 0, s, q).value;
  const double k = std::max((h1 - h0) / amp, 0.0) * std::pow(h, 1.0 + s.value());
  std::lock_guard lock(m);
  return cache.emplace(key, k).first->second;
}


}  // namespace detail

/// One explicit Euler step of x_t = -H^s nu for all fronts with a shared dt,
///   dt = min(cfl * min_i spacing_i / |H_i|, stability * h_min^(1+s) / K, dt_cap),
/// where K h^-(1+s) is the damping rate of the grid-scale sawtooth (detail::sawtooth_stiffness);
/// followed by resampling. Fronts that become too small are dropped with an extinction event.
/// A step whose moved fronts are invalid or whose new curvatures fail to converge is rejected
/// and retried with dt halved up to cfg.max_retries times (one accuracy_failure event per
/// rejection); after that AccuracyError is thrown.
inline FlowState flow_step(const FlowState& state, FracOrder s, const FlowConfig& cfg,
                           std::vector<FlowEvent>* events = nullptr,
                           double dt_cap = std::numeric_limits<double>::infinity()) {
  cfg.validate();
  const auto field = cfg.spacing();
  std::vector<std::vector<double>> H = state.curvature;
  H.resize(state.fronts.size());
  const double stiffness = state.fronts.empty() ? 0.0 : detail::sawtooth_stiffness(s, cfg.quad);
  double dt = dt_cap;
  for (std::size_t k = 0; k < state.fronts.size(); ++k) {
    const auto& c = state.fronts[k];
    if (H[k].size() != c.size()) H[k] = detail::node_curvatures(c, s, cfg.quad);
    double h_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double h = local_spacing(c, i);
      h_min = std::min(h_min, h);
      if (H[k][i] != 0.0) dt = std::min(dt, cfg.cfl * h / std::abs(H[k][i]));
    }
    if (stiffness > 0.0) dt = std::min(dt, cfg.stability * std::pow(h_min, 1.0 + s.value()) / stiffness);
  }
  if (!std::isfinite(dt)) dt = cfg.cfl * cfg.target_spacing;

  for (int attempt = 0;; ++attempt) {
    try {
      FlowState next;
      next.time = state.time + dt;
      next.target_spacing = cfg.target_spacing;
      next.step_count = state.step_count + 1;
      next.last_dt = dt;
      std::vector<FlowEvent> local_events;
      for (std::size_t k = 0; k < state.fronts.size(); ++k) {
        const auto& c = state.fronts[k];
        std::vector<Point> moved(c.size());
        for (std::size_t i = 0; i < c.size(); ++i)
          moved[i] = c[i] - (dt * H[k][i]) * node_normal(c, i);
        std::optional<ClosedCurve> r;
        try {
          r = resample(ClosedCurve(std::move(moved)), field);
        } catch (const TooSmallError& e) {
          local_events.push_back({FlowEvent::Kind::extinction, next.time, c.centroid(), e.what()});
          continue;
        }
        if (r->area() < detail::extinction_area(cfg)) {
          local_events.push_back({FlowEvent::Kind::extinction, next.time, r->centroid(),
                                  "enclosed area below (4 h)^2"});
          continue;
        }
        next.curvature.push_back(detail::node_curvatures(*r, s, cfg.quad));
        next.fronts.push_back(std::move(*r));
      }
      if (events) events->insert(events->end(), local_events.begin(), local_events.end());
      return next;
    } catch (const std::exception& e) {
      if (events)
        events->push_back({FlowEvent::Kind::accuracy_failure, state.time, {},
                           std::string("step rejected (dt=") + std::to_string(dt) + "): " + e.what()});
      if (attempt >= cfg.max_retries)
        throw AccuracyError(std::string("flow step failed after retries: ") + e.what(), {});
      dt *= 0.5;
    }
  }
}

struct PinchResult {
  std::vector<FlowEvent> events;
  std::vector<ClosedCurve> fronts;
};

/// Looks for non-adjacent nodes closer than pinch_factor times the finest target spacing on the
/// curve (for a uniform field, pinch_factor * target_spacing). Pairs within k = ceil(pinch_factor)
/// positions of each other along the curve, or whose shorter connecting arc is shorter than twice
/// the threshold, are local bends and are ignored. At the closest qualifying pair (distances
/// equal to 1e-9 relative count as ties, resolved toward the pair whose midpoint is nearest the
/// centroid) the curve is cut into two closed curves joined across the pair; the midpoint of the
/// new edge becomes node 0 of both pieces, which are then resampled. Pieces that cannot be
/// resampled or are below the extinction area are reported extinct.
inline PinchResult detect_pinch_and_split(const ClosedCurve& curve, const FlowConfig& cfg,
                                          double time = 0.0) {
  cfg.validate();
  const auto field = cfg.spacing();
  const std::size_t n = curve.size();
  const auto k = static_cast<std::size_t>(std::ceil(cfg.pinch_factor));
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t e = 0; e < n; ++e) cum[e + 1] = cum[e] + curve.edge_length(e);
  const double perimeter = cum[n];

  double h_min = std::numeric_limits<double>::infinity();
  for (const auto& p : curve.nodes()) h_min = std::min(h_min, field.at(p));
  const double thr = cfg.pinch_factor * h_min;
  const Point centre = curve.centroid();

  double best = std::numeric_limits<double>::infinity();
  double best_off = best;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + k + 1; j < n; ++j) {
      if (n - (j - i) <= k) continue;
      const double d = distance(curve[i], curve[j]);
      if (!(d < thr)) continue;
      const double arc = std::min(cum[j] - cum[i], perimeter - (cum[j] - cum[i]));
      if (arc < 2.0 * thr) continue;
      const double off = distance(0.5 * (curve[i] + curve[j]), centre);
      const bool tie = std::abs(d - best) <= 1e-9 * best;
      if ((!tie && d < best) || (tie && off < best_off)) {
        best = d;
        best_off = off;
        bi = i;
        bj = j;
      }
    }
  }
  PinchResult out;
  if (!std::isfinite(best)) {
    out.fronts.push_back(curve);
    return out;
  }
  const Point mid = 0.5 * (curve[bi] + curve[bj]);
  out.events.push_back({FlowEvent::Kind::pinch, time, mid,
                        "nodes " + std::to_string(bi) + " and " + std::to_string(bj) +
                            " at distance " + std::to_string(best)});
  std::vector<Point> a{mid}, b{mid};
  for (std::size_t i = bi; i <= bj; ++i) a.push_back(curve[i]);
  for (std::size_t i = bj; i < bi + n + 1; ++i) b.push_back(curve[i % n]);
  int pieces = 0;
  for (auto* piece : {&a, &b}) {
    try {
      ClosedCurve c = resample(ClosedCurve(std::move(*piece)), field);
      if (c.area() < detail::extinction_area(cfg)) {
        out.events.push_back({FlowEvent::Kind::extinction, time, c.centroid(),
                              "split fragment below (4 h)^2"});
        continue;
      }
      out.fronts.push_back(std::move(c));
      ++pieces;
    } catch (const GeometryError& e) {
      out.events.push_back({FlowEvent::Kind::extinction, time, mid,
                            std::string("split fragment discarded: ") + e.what()});
    }
  }
  out.events.push_back({FlowEvent::Kind::split, time, mid,
                        std::to_string(pieces) + " fronts after split"});
  return out;
}

struct StopCondition {
  double max_time = std::numeric_limits<double>::infinity();
  bool on_all_extinct = true;
  bool on_first_pinch = false;
};

struct RunOptions {
  int snapshot_stride = 1;
  /// Times the integrator lands on exactly (dt is capped); a snapshot is taken at each.
  std::vector<double> checkpoints;
};

struct FlowRun {
  std::vector<FlowState> trajectory;
  std::vector<FlowEvent> events;
};

/// Integrates until a stop condition holds. Snapshots: the initial state, every
/// snapshot_stride-th step, every checkpoint, every step with an event, and the final state.
inline FlowRun run_flow(const std::vector<ClosedCurve>& initial, FracOrder s,
                        const FlowConfig& cfg, const StopCondition& stop = {},
                        const RunOptions& opts = {}) {
  cfg.validate();
  FlowRun run;
  if (initial.empty()) return run;
  FlowState state;
  state.fronts = initial;
  state.target_spacing = cfg.target_spacing;
  for (const auto& c : state.fronts) state.curvature.push_back(detail::node_curvatures(c, s, cfg.quad));
  std::vector<double> checkpoints = opts.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  std::size_t next_cp = 0;
  auto snapshot = [&] {
    if (run.trajectory.empty() || run.trajectory.back().step_count != state.step_count)
      run.trajectory.push_back(state);
  };
  snapshot();
  const int stride = std::max(1, opts.snapshot_stride);
  while (true) {
    if (state.fronts.empty() && stop.on_all_extinct) break;
    if (state.time >= stop.max_time) break;
    if (state.step_count >= cfg.max_steps) {
      run.events.push_back({FlowEvent::Kind::truncation, state.time, {},
                            "max_steps " + std::to_string(cfg.max_steps) + " reached"});
      break;
    }
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= state.time) ++next_cp;
    double cap = stop.max_time - state.time;
    if (next_cp < checkpoints.size()) cap = std::min(cap, checkpoints[next_cp] - state.time);
    const std::size_t events_before = run.events.size();
    try {
      state = flow_step(state, s, cfg, &run.events, cap);
    } catch (const AccuracyError& e) {
      run.events.push_back({FlowEvent::Kind::accuracy_failure, state.time, {}, e.what()});
      break;
    }
    const bool at_checkpoint = next_cp < checkpoints.size() && state.time >= checkpoints[next_cp];
    if (at_checkpoint) state.time = checkpoints[next_cp];

    bool pinched = false;
    bool failed = false;
    std::vector<ClosedCurve> fronts;
    std::vector<std::vector<double>> curv;
    for (std::size_t f = 0; f < state.fronts.size(); ++f) {
      auto pr = detect_pinch_and_split(state.fronts[f], cfg, state.time);
      if (pr.events.empty()) {
        fronts.push_back(std::move(state.fronts[f]));
        curv.push_back(std::move(state.curvature[f]));
        continue;
      }
      pinched = true;
      run.events.insert(run.events.end(), pr.events.begin(), pr.events.end());
      for (auto& c : pr.fronts) {
        try {
          curv.push_back(detail::node_curvatures(c, s, cfg.quad));
        } catch (const std::exception& e) {
          run.events.push_back({FlowEvent::Kind::accuracy_failure, state.time, c.centroid(),
                                std::string("split front: ") + e.what()});
          curv.emplace_back();
          failed = true;
        }
        fronts.push_back(std::move(c));
      }
    }
    state.fronts = std::move(fronts);
    state.curvature = std::move(curv);
    if (failed) break;

    if (at_checkpoint || run.events.size() != events_before || state.step_count % stride == 0)
      snapshot();
    if (pinched && stop.on_first_pinch) break;
  }
  snapshot();
  return run;
}

/// True iff every node of `inner` lies in the region bounded by `outer` or within tol of it.
inline bool inclusion_check(const ClosedCurve& inner, const ClosedCurve& outer, double tol) {
  for (const auto& p : inner.nodes())
    if (!outer.interior_contains(p) && outer.distance_to(p) > tol) return false;
  return true;
}

}  // namespace fmcf
