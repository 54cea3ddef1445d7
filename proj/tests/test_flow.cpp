#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fmcf/barriers.hpp"
#include "fmcf/closed_forms.hpp"
#include "fmcf/flow.hpp"
#include "fmcf/shapes.hpp"

using namespace fmcf;

namespace {

const FracOrder kHalf(0.5);

FlowConfig config(double h) {
  FlowConfig c;
  c.target_spacing = h;
  return c;
}

// Two unit lobes centred at (+-2, 0) joined by a straight neck of half-width g, nodes every ~h,
// symmetric in both axes, node 0 on the positive x-axis.
ClosedCurve barbell(double g, double h) {
  std::vector<Point> p;
  const double th0 = std::asin(g);
  const double xj = 2.0 - std::cos(th0);
  const int arc_n = static_cast<int>(std::ceil(2.0 * (std::numbers::pi - th0) / h / 2.0)) * 2;
  const int neck_n = static_cast<int>(std::ceil(2.0 * xj / h / 2.0)) * 2;
  // right lobe, upper half: angle 0 .. pi - th0
  for (int k = 0; k < arc_n / 2; ++k) {
    const double a = (std::numbers::pi - th0) * k / (arc_n / 2);
    p.push_back({2.0 + std::cos(a), std::sin(a)});
  }
  for (int k = 0; k < neck_n; ++k) p.push_back({xj - 2.0 * xj * k / neck_n, g});
  for (int k = 0; k < arc_n; ++k) {
    const double a = th0 + 2.0 * (std::numbers::pi - th0) * k / arc_n;
    p.push_back({-2.0 + std::cos(a), std::sin(a)});
  }
  for (int k = 0; k < neck_n; ++k) p.push_back({-xj + 2.0 * xj * k / neck_n, -g});
  for (int k = 0; k < arc_n / 2; ++k) {
    const double a = -(std::numbers::pi - th0) + (std::numbers::pi - th0) * k / (arc_n / 2);
    p.push_back({2.0 + std::cos(a), std::sin(a)});
  }
  return ClosedCurve(std::move(p));
}

// Largest distance from a node of `a` to the nearest node of the image of `b`.
template <class Map>
double image_mismatch(const ClosedCurve& a, const ClosedCurve& b, Map map) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& p : a.nodes()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b.nodes()) best = std::min(best, distance(p, map(q)));
    worst = std::max(worst, best);
  }
  return worst;
}

Point flip_x(const Point& p) { return {-p.x, p.y}; }
Point flip_y(const Point& p) { return {p.x, -p.y}; }

}  // namespace

TEST(FlowConfig, Validation) {
  auto c = config(0.1);
  EXPECT_NO_THROW(c.validate());
  c.cfl = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
  c = config(0.0);
  EXPECT_THROW(c.validate(), DomainError);
  c = config(0.1);
  c.pinch_factor = 1.0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Resample, UniformCurveIsFixedPoint) {
  const auto c = circle_curve(1.0, 256);
  const double h = c.length() / 256.0;
  const auto r = resample(c, h);
  ASSERT_EQ(r.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LT(distance(r[i], c[i]), h / 10.0);
}

TEST(Resample, StretchedEdgeIsSubdivided) {
  // 1 x 1 square sampled every h, but one edge spanning 3h
  const double h = 0.125;
  std::vector<Point> p;
  for (int k = 0; k < 8; ++k) p.push_back({k * h, 0.0});
  for (int k = 0; k < 8; ++k) p.push_back({1.0, k * h});
  for (int k = 0; k < 8; ++k) p.push_back({1.0 - k * h, 1.0});
  p.push_back({0.0, 1.0});
  p.push_back({0.0, 1.0 - 3.0 * h});
  for (int k = 5; k < 8; ++k) p.push_back({0.0, 1.0 - k * h});
  const ClosedCurve c(std::move(p));
  const auto r = resample(c, h);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_LE(r.edge_length(i), 2.0 * h);
    EXPECT_GE(r.edge_length(i), 0.5 * h);
  }
}

TEST(Resample, PreservesAreaOnCircle) {
  const auto c = circle_curve(1.0, 512);
  const auto r = resample(c, 0.9 * c.length() / 512.0);
  EXPECT_LT(std::abs(r.area() / c.area() - 1.0), 1e-3);
}

TEST(Resample, SpacingWithinBounds) {
  const auto c = ellipse_curve(2.0, 0.5, 60);
  const double h = 0.05;
  const auto r = resample(c, h);
  EXPECT_EQ(r.size() % 4, 0u);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_LE(r.edge_length(i), 2.0 * h);
    EXPECT_GE(r.edge_length(i), 0.5 * h);
  }
}

TEST(Resample, PreservesMirrorSymmetry) {
  const auto c = barbell(0.3, 0.1);
  const auto r = resample(c, 0.07);
  EXPECT_LT(image_mismatch(r, r, flip_x), 1e-12);
  EXPECT_LT(image_mismatch(r, r, flip_y), 1e-12);
}

TEST(Resample, RefinedFieldConcentratesNodes) {
  const auto c = ellipse_curve(2.0, 1.0, 400);
  const auto r = resample(c, SpacingField{0.1, 4.0, 0.5});
  double near = 1e300, far = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Point mid = 0.5 * (r[i] + r.at(static_cast<std::ptrdiff_t>(i) + 1));
    if (std::abs(mid.x) < 0.05) near = std::min(near, r.edge_length(i));
    if (std::abs(mid.x) > 1.5) far = std::max(far, r.edge_length(i));
  }
  EXPECT_LT(near, 0.05);
  EXPECT_GT(far, 0.08);
}

TEST(Resample, TooSmallThrows) {
  const auto c = circle_curve(0.01, 16);
  EXPECT_THROW(resample(c, 0.05), TooSmallError);
}

TEST(FlowStep, CircleShrinksUniformly) {
  const auto c = circle_curve(1.0, 512);
  const auto cfg = config(c.length() / 512.0);
  FlowState st;
  st.fronts = {c};
  const auto next = flow_step(st, kHalf, cfg);
  ASSERT_EQ(next.fronts.size(), 1u);
  const double dt = next.last_dt;
  EXPECT_GT(dt, 0.0);
  const double w = omega_bar(2, kHalf);
  const double expected = 1.0 - dt * w;
  const double r0 = norm(next.fronts[0][0]);
  for (const auto& p : next.fronts[0].nodes()) {
    // polygon curvature is within 1e-4 of omega_bar at this resolution
    EXPECT_NEAR(norm(p), expected, 1e-4 * dt * w + 1e-12);
    EXPECT_NEAR(norm(p), r0, 1e-12);
  }
  EXPECT_EQ(next.step_count, 1);
  EXPECT_DOUBLE_EQ(next.time, dt);
}

TEST(FlowStep, MirrorSymmetryPreserved) {
  auto cfg = config(0.1);
  FlowState st;
  st.fronts = {resample(barbell(0.3, 0.1), 0.1)};
  for (int k = 0; k < 3; ++k) st = flow_step(st, kHalf, cfg);
  const auto& f = st.fronts[0];
  EXPECT_LT(image_mismatch(f, f, flip_x), 1e-9);
  EXPECT_LT(image_mismatch(f, f, flip_y), 1e-9);
}

TEST(FlowStep, DtCapIsHonoured) {
  FlowState st;
  st.fronts = {circle_curve(1.0, 64)};
  const auto next = flow_step(st, kHalf, config(0.1), nullptr, 1e-5);
  EXPECT_DOUBLE_EQ(next.last_dt, 1e-5);
}

TEST(FlowStep, ConvexCircleStaysPositiveAndAreaDecreases) {
  const auto c = circle_curve(1.0, 512);
  const auto cfg = config(c.length() / 512.0);
  FlowState st;
  st.fronts = {c};
  double area = c.area();
  for (int k = 0; k < 100; ++k) {
    st = flow_step(st, kHalf, cfg);
    ASSERT_EQ(st.fronts.size(), 1u);
    const auto& H = st.curvature[0];
    EXPECT_GT(*std::min_element(H.begin(), H.end()), 0.0) << "step " << k;
    EXPECT_LT(st.fronts[0].area(), area) << "step " << k;
    area = st.fronts[0].area();
  }
}

TEST(PinchDetection, CircleHasNone) {
  const auto c = circle_curve(1.0, 128);
  const auto r = detect_pinch_and_split(c, config(c.length() / 128.0));
  EXPECT_TRUE(r.events.empty());
  ASSERT_EQ(r.fronts.size(), 1u);
  EXPECT_EQ(r.fronts[0].size(), c.size());
}

TEST(PinchDetection, BarbellSplitsOnceIntoMirrorImages) {
  const double h = 0.1;
  const auto c = barbell(0.05, h);
  const auto r = detect_pinch_and_split(c, config(h), 0.25);
  int pinches = 0;
  for (const auto& e : r.events) {
    if (e.kind != FlowEvent::Kind::pinch) continue;
    ++pinches;
    EXPECT_NEAR(e.location.x, 0.0, 1e-12);
    EXPECT_NEAR(e.location.y, 0.0, 1e-12);
    EXPECT_EQ(e.time, 0.25);
  }
  EXPECT_EQ(pinches, 1);
  ASSERT_EQ(r.fronts.size(), 2u);
  for (const auto& f : r.fronts) {
    EXPECT_TRUE(f.is_simple());
    EXPECT_EQ(f.orientation(), Orientation::counterclockwise);
  }
  EXPECT_LT(image_mismatch(r.fronts[0], r.fronts[1], flip_x), 1e-9);
  EXPECT_NEAR(r.fronts[0].area(), r.fronts[1].area(), 1e-9);
}

TEST(PinchDetection, WideNeckDoesNotSplit) {
  const auto r = detect_pinch_and_split(barbell(0.3, 0.1), config(0.1));
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(r.fronts.size(), 1u);
}

TEST(RunFlow, EmptyInput) {
  const auto run = run_flow({}, kHalf, config(0.1));
  EXPECT_TRUE(run.trajectory.empty());
  EXPECT_TRUE(run.events.empty());
}

TEST(RunFlow, MaxStepsGivesTruncationEvent) {
  auto cfg = config(0.1);
  cfg.max_steps = 3;
  const auto run = run_flow({circle_curve(1.0, 64)}, kHalf, cfg);
  ASSERT_FALSE(run.events.empty());
  EXPECT_EQ(run.events.back().kind, FlowEvent::Kind::truncation);
  EXPECT_EQ(run.trajectory.back().step_count, 3);
}

TEST(RunFlow, Deterministic) {
  auto cfg = config(0.1);
  cfg.max_steps = 20;
  const auto a = run_flow({ellipse_curve(1.5, 0.8, 96)}, kHalf, cfg);
  const auto b = run_flow({ellipse_curve(1.5, 0.8, 96)}, kHalf, cfg);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    EXPECT_EQ(a.trajectory[k].time, b.trajectory[k].time);
    const auto& fa = a.trajectory[k].fronts[0];
    const auto& fb = b.trajectory[k].fronts[0];
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(fa[i], fb[i]);
  }
}

TEST(RunFlow, CheckpointsAreHitExactly) {
  RunOptions opts;
  opts.snapshot_stride = 1000;
  opts.checkpoints = {0.001, 0.0025};
  StopCondition stop;
  stop.max_time = 0.003;
  const auto run = run_flow({circle_curve(1.0, 64)}, kHalf, config(0.1), stop, opts);
  int hits = 0;
  for (const auto& st : run.trajectory) hits += (st.time == 0.001 || st.time == 0.0025) ? 1 : 0;
  EXPECT_EQ(hits, 2);
  EXPECT_DOUBLE_EQ(run.trajectory.back().time, 0.003);
}

TEST(RunFlow, NestedCirclesInnerExtinctFirst) {
  const double h = 2.0 * std::numbers::pi / 64.0;
  const auto cfg = config(h);
  const auto inner = run_flow({circle_curve(1.0, 64)}, kHalf, cfg);
  const auto outer = run_flow({circle_curve(2.0, 128)}, kHalf, cfg);
  auto extinction = [](const FlowRun& r) {
    for (const auto& e : r.events)
      if (e.kind == FlowEvent::Kind::extinction) return e.time;
    return std::numeric_limits<double>::infinity();
  };
  const double ti = extinction(inner), to = extinction(outer);
  EXPECT_LT(ti, to);
  // coarse run: extinction is declared once the area drops below (4h)^2
  EXPECT_NEAR(ti / ball_extinction_time({{}, 1.0, 2}, kHalf), 1.0, 0.1);
  EXPECT_NEAR(to / ball_extinction_time({{}, 2.0, 2}, kHalf), 1.0, 0.1);
}

TEST(InclusionCheck, Circles) {
  const auto a = circle_curve(1.0, 64), b = circle_curve(2.0, 64);
  EXPECT_TRUE(inclusion_check(a, b, 0.0));
  EXPECT_FALSE(inclusion_check(b, a, 0.0));
  EXPECT_TRUE(inclusion_check(circle_curve(2.05, 64), b, 0.1));
}
