#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "limitlab/geometry.hpp"
#include "oracles.hpp"

using namespace limitlab;

TEST(UnitBallVolume, LowDimensions) {
  EXPECT_NEAR(unit_ball_volume(Dimension(1)), 2.0, 1e-15);
  EXPECT_NEAR(unit_ball_volume(Dimension(2)), std::numbers::pi, 1e-15);
  EXPECT_NEAR(unit_ball_volume(Dimension(3)), 4.0 * std::numbers::pi / 3.0, 1e-14);
}

TEST(UnitBallVolume, MatchesGammaFormulaUpToDimension20) {
  for (int n = 1; n <= 20; ++n)
    EXPECT_NEAR(unit_ball_volume(Dimension(n)) / oracle::ball_volume(n), 1.0, 1e-13) << n;
}

TEST(Dimension, RejectsZero) { EXPECT_THROW(Dimension(0), std::invalid_argument); }

TEST(BallIntersection, IntervalOverlap) {
  const Point a{0.0}, b{0.5};
  EXPECT_DOUBLE_EQ(ball_intersection_volume(Dimension(1), a, 1.0, b, 1.0).value, 1.5);
}

TEST(BallIntersection, IdenticalDisks) {
  const Point c{0.3, -0.2};
  EXPECT_NEAR(ball_intersection_volume(Dimension(2), c, 1.0, c, 1.0).value, std::numbers::pi, 1e-15);
}

TEST(BallIntersection, LensMatchesFrozenValueAndMonteCarlo) {
  // 2 r^2 acos(d / 2r) - (d/2) sqrt(4 r^2 - d^2) at r = d = 1.
  constexpr double kLens = 1.2283696986087567;
  const Point a{0.0, 0.0}, b{1.0, 0.0};
  const auto v = ball_intersection_volume(Dimension(2), a, 1.0, b, 1.0);
  EXPECT_NEAR(v.value, kLens, 1e-14);
  EXPECT_EQ(v.std_error, 0.0);
  const auto mc = oracle::lens_mc({0.0, 0.0}, 1.0, {1.0, 0.0}, 1.0, 10'000'000, 17);
  EXPECT_LE(std::abs(mc.value - kLens), 3.0 * mc.std_error);
}

TEST(BallIntersection, SphericalCapsMatchMonteCarlo) {
  // Two unit balls in R^3 at distance 1: 2 * cap of height 1/2 = 5 pi / 12.
  const Point a{0.0, 0.0, 0.0}, b{0.0, 1.0, 0.0};
  EXPECT_NEAR(ball_intersection_volume(Dimension(3), a, 1.0, b, 1.0).value, 5.0 * std::numbers::pi / 12.0, 1e-14);
}

TEST(BallIntersection, RejectsNonpositiveRadius) {
  const Point a{0.0};
  EXPECT_THROW(ball_intersection_volume(Dimension(1), a, 0.0, a, 1.0), std::invalid_argument);
  EXPECT_THROW(ball_intersection_volume(Dimension(1), a, 1.0, a, -1.0), std::invalid_argument);
}

TEST(BallIntersection, HighDimensionQmcReportsError) {
  const Point a(4, 0.0), b{0.5, 0.0, 0.0, 0.0};
  const auto v = ball_intersection_volume(Dimension(4), a, 1.0, b, 1.0);
  EXPECT_GT(v.std_error, 0.0);
  EXPECT_LT(v.value, unit_ball_volume(Dimension(4)));
  // Containment is exact even in high dimension.
  const auto inside = ball_intersection_volume(Dimension(4), a, 2.0, b, 0.5);
  EXPECT_NEAR(inside.value, ball_volume(Dimension(4), 0.5), 1e-14);
}

// Properties: symmetry, upper bound, disjointness, translation invariance.
TEST(BallIntersectionProperty, SymmetricBoundedTranslationInvariant) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5), rad(0.1, 1.5);
  for (int n = 1; n <= 3; ++n) {
    const Dimension d(n);
    for (int trial = 0; trial < 200; ++trial) {
      Point c1(n), c2(n), s(n);
      for (int i = 0; i < n; ++i) c1[i] = u(gen), c2[i] = u(gen), s[i] = 10.0 * u(gen);
      const double r1 = rad(gen), r2 = rad(gen);
      const double v = ball_intersection_volume(d, c1, r1, c2, r2).value;
      EXPECT_NEAR(v, ball_intersection_volume(d, c2, r2, c1, r1).value, 1e-13);
      EXPECT_LE(v, std::min(ball_volume(d, r1), ball_volume(d, r2)) * (1 + 1e-14));
      EXPECT_GE(v, 0.0);
      Point t1 = c1, t2 = c2;
      for (int i = 0; i < n; ++i) t1[i] += s[i], t2[i] += s[i];
      EXPECT_NEAR(v, ball_intersection_volume(d, t1, r1, t2, r2).value, 1e-12);
      if (distance(c1, c2) >= r1 + r2) {
        EXPECT_EQ(v, 0.0);
      }
    }
  }
}

TEST(SphereQuadrature, OneDimensionIsTwoPoints) {
  const auto r = sphere_quadrature(Dimension(1), 7);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.nodes[0][0], 1.0);
  EXPECT_EQ(r.nodes[1][0], -1.0);
  EXPECT_EQ(r.weights[0], 1.0);
  EXPECT_EQ(r.weights[1], 1.0);
}

TEST(SphereQuadrature, CircleOddSymmetry) {
  const auto r = sphere_quadrature(Dimension(2), 64);
  EXPECT_NEAR(r.integrate([](std::span<const double> u) { return u[0]; }), 0.0, 1e-14);
}

TEST(SphereQuadrature, CircleTrigExactness) {
  const auto r = sphere_quadrature(Dimension(2), 16);
  // cos^2 has degree 2 < 16: exact value pi.
  EXPECT_NEAR(r.integrate([](std::span<const double> u) { return u[0] * u[0]; }), std::numbers::pi, 1e-14);
}

TEST(SphereQuadrature, SphereArea) {
  const auto r = sphere_quadrature(Dimension(3), 32);
  EXPECT_NEAR(r.integrate([](std::span<const double>) { return 1.0; }), 4.0 * std::numbers::pi, 1e-10);
}

TEST(SphereQuadrature, RejectsOrderZero) { EXPECT_THROW(sphere_quadrature(Dimension(2), 0), std::invalid_argument); }

TEST(SphereQuadratureProperty, UnitNodesPositiveWeightsTotalArea) {
  for (int n = 1; n <= 5; ++n) {
    const Dimension d(n);
    for (int order : {1, 4, 17, 32}) {
      const auto r = sphere_quadrature(d, order);
      double total = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_NEAR(norm(r.nodes[i]), 1.0, 1e-12);
        EXPECT_GT(r.weights[i], 0.0);
        total += r.weights[i];
      }
      EXPECT_NEAR(total, sphere_surface_area(d), 1e-10) << n << ' ' << order;
    }
  }
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto g = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 14);
  EXPECT_NEAR(s, 2.0 / 15.0, 1e-15);
}
