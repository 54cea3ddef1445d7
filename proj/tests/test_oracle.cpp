#include <gtest/gtest.h>

#include <cmath>

#include "fmcf/closed_forms.hpp"
#include "fmcf/oracle.hpp"

using namespace fmcf;

namespace {

CurvatureResult disk_oracle(double R, double s) {
  return region_curvature_oracle([R](const Point& p) { return p.x * p.x + p.y * p.y < R * R; }, {R, 0.0},
                                 {1.0, 0.0}, FracOrder(s));
}

CurvatureResult slab_oracle(double a, double s) {
  return region_curvature_oracle([a](const Point& p) { return std::abs(p.y) < a; }, {0.0, a}, {0.0, 1.0},
                                 FracOrder(s));
}

}  // namespace

// Values computed once by the region oracle and frozen.
TEST(RegionOracle, UnitDiskPinnedValues) {
  EXPECT_NEAR(disk_oracle(1.0, 0.5).value, 14.83259646, 1e-4);
  EXPECT_NEAR(disk_oracle(1.0, 0.3).value, 21.96668, 1e-3);
  EXPECT_NEAR(disk_oracle(1.0, 0.7).value, 14.00263, 1e-3);
}

TEST(RegionOracle, ErrorEstimateCoversClosedForm) {
  for (double s : {0.3, 0.5, 0.7}) {
    const auto r = disk_oracle(1.0, s);
    const double exact = 2.0 / s * std::pow(2.0, -s) * std::sqrt(std::numbers::pi) * std::tgamma((1.0 - s) / 2.0) /
                         std::tgamma(1.0 - s / 2.0);
    EXPECT_LE(std::abs(r.value - exact), std::max(r.error_estimate, 1e-6 * exact)) << "s=" << s;
    EXPECT_GT(r.value, 0.0);
  }
}

TEST(RegionOracle, HalfPlaneIsZero) {
  const QuadConfig cfg;
  const auto r = region_curvature_oracle([](const Point& p) { return p.y < 0.0; }, {}, {0.0, 1.0}, FracOrder(0.5));
  EXPECT_LT(std::abs(r.value), cfg.abs_tol);
}

TEST(RegionOracle, DiskScalingLaw) {
  const double ratio = disk_oracle(2.0, 0.5).value / disk_oracle(1.0, 0.5).value;
  EXPECT_NEAR(ratio, std::pow(2.0, -0.5), 1e-6);
}

TEST(RegionOracle, SlabPinnedValues) {
  EXPECT_NEAR(slab_oracle(0.05, 0.5).value, 30.31081678, 1e-3);
  EXPECT_NEAR(slab_oracle(0.1, 0.5).value, 21.43298409, 1e-3);
  EXPECT_NEAR(slab_oracle(0.2, 0.5).value, 15.15540839, 1e-3);
}

TEST(RegionOracle, ComplementNegates) {
  const auto in = disk_oracle(1.0, 0.5);
  const auto out = region_curvature_oracle([](const Point& p) { return p.x * p.x + p.y * p.y > 1.0; }, {1.0, 0.0},
                                           {-1.0, 0.0}, FracOrder(0.5));
  EXPECT_NEAR(out.value, -in.value, in.error_estimate + out.error_estimate);
}

TEST(RegionOracle, InconsistentIndicatorThrows) {
  EXPECT_THROW(region_curvature_oracle([](const Point&) { return true; }, {}, {0.0, 1.0}, FracOrder(0.5)),
               GeometryError);
  EXPECT_THROW(region_curvature_oracle([](const Point& p) { return p.y < 0.0; }, {}, {0.0, -1.0}, FracOrder(0.5)),
               GeometryError);
}

TEST(ClosedForms, OmegaBarPlaneMatchesOracle) {
  for (double s : {0.3, 0.5, 0.7}) {
    const auto r = disk_oracle(1.0, s);
    EXPECT_NEAR(omega_bar(2, FracOrder(s)) / r.value, 1.0, 5e-3) << "s=" << s;
  }
}

TEST(ClosedForms, OmegaBarPositiveAndCached) {
  for (int n : {2, 3, 4})
    for (double s : {0.1, 0.5, 0.9}) EXPECT_GT(omega_bar(n, FracOrder(s)), 0.0);
  EXPECT_EQ(omega_bar(2, FracOrder(0.5)), omega_bar(2, FracOrder(0.5)));
  EXPECT_THROW(omega_bar(1, FracOrder(0.5)), DomainError);
}

TEST(ClosedForms, OmegaBarSphereMatchesBetaForm) {
  // |S^1| 2^(-1-s) B((1-s)/2, 1) (2/s) for n = 3
  const double s = 0.5;
  const double beta = std::tgamma((1.0 - s) / 2.0) * std::tgamma(1.0) / std::tgamma((1.0 - s) / 2.0 + 1.0);
  const double expected = 2.0 / s * 2.0 * std::numbers::pi * std::pow(2.0, -1.0 - s) * beta;
  EXPECT_NEAR(omega_bar(3, FracOrder(s)) / expected, 1.0, 1e-6);
}

TEST(ClosedForms, BallCurvature) {
  const FracOrder s(0.5);
  const double w = omega_bar(2, s);
  EXPECT_DOUBLE_EQ(ball_curvature(1.0, 2, s), w);
  EXPECT_NEAR(ball_curvature(4.0, 2, s), w / 2.0, 1e-12 * w);
  EXPECT_GT(ball_curvature(10.0, 2, s), ball_curvature(100.0, 2, s));
  EXPECT_GT(ball_curvature(1e8, 2, s), 0.0);
  EXPECT_THROW(ball_curvature(0.0, 2, s), DomainError);
}

TEST(ClosedForms, SlabMatchesOracle) {
  for (double a : {0.05, 0.1, 0.2}) {
    const auto r = slab_oracle(a, 0.5);
    EXPECT_NEAR(slab_curvature(a, 2, FracOrder(0.5)) / r.value, 1.0, 5e-3) << "a=" << a;
  }
}

TEST(ClosedForms, SlabScaling) {
  const FracOrder s(0.5);
  EXPECT_NEAR(slab_curvature(0.2, 2, s) / slab_curvature(0.1, 2, s), std::pow(2.0, -0.5), 1e-14);
  EXPECT_GT(slab_curvature(1e9, 2, s), 0.0);
  EXPECT_LT(slab_curvature(1e9, 2, s), 1e-3);
  EXPECT_THROW(slab_curvature(0.0, 2, s), DomainError);
  // n = 3 constant: pi / (1 + s) * ... equals integral of (1+|w|^2)^(-(3+s)/2) over R^2
  EXPECT_NEAR(slab_constant(3, s), 2.0 * std::numbers::pi / (1.0 + s), 1e-12);
}

TEST(ClosedForms, RegularPolygon) {
  const auto c = regular_polygon(16, 2.0, {1.0, 1.0});
  EXPECT_NEAR(distance(c[5], {1.0, 1.0}), 2.0, 1e-14);
  EXPECT_EQ(c.orientation(), Orientation::counterclockwise);
}
