#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fderiv/function_space.hpp"
#include "test_helpers.hpp"

using namespace fderiv;

namespace {

Curve sqrt2_sin(const GridPtr& g) {
  return Curve::from_function(g, [](double t) { return std::numbers::sqrt2 * std::sin(2 * std::numbers::pi * t); });
}

Curve random_curve(const GridPtr& g, std::mt19937_64& gen) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(g->size());
  for (double& x : v) x = d(gen);
  return Curve(g, std::move(v));
}

}  // namespace

TEST(Grid, TrapezoidWeightsSumToSpan) {
  const auto g = Grid::make({0.0, 0.1, 0.35, 0.9, 1.0});
  double s = 0.0;
  for (double w : g->weights()) {
    EXPECT_GT(w, 0.0);
    s += w;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(g->weight(0), 0.05);
  EXPECT_DOUBLE_EQ(g->weight(2), 0.4);

  const auto partial = Grid::make({0.2, 0.5, 0.7});
  double sp = 0.0;
  for (double w : partial->weights()) sp += w;
  EXPECT_NEAR(sp, 0.5, 1e-12);
}

TEST(Grid, RejectsInvalidPoints) {
  EXPECT_FDERIV_ERROR(Grid::make({0.5}), ErrorKind::InvalidGrid);
  EXPECT_FDERIV_ERROR(Grid::make({0.0, 0.5, 0.5, 1.0}), ErrorKind::InvalidGrid);
  EXPECT_FDERIV_ERROR(Grid::make({0.0, 0.7, 0.3}), ErrorKind::InvalidGrid);
  EXPECT_FDERIV_ERROR(Grid::make({-0.1, 1.0}), ErrorKind::InvalidGrid);
  EXPECT_FDERIV_ERROR(Grid::make({0.0, 1.5}), ErrorKind::InvalidGrid);
}

TEST(Curve, RejectsBadValues) {
  const auto g = Grid::uniform(3);
  EXPECT_FDERIV_ERROR(Curve(g, {1.0, 2.0}), ErrorKind::InvalidCurve);
  EXPECT_FDERIV_ERROR(Curve(g, {1.0, NAN, 2.0}), ErrorKind::InvalidCurve);
}

TEST(InnerProduct, Constants) {
  for (std::size_t m : {2u, 7u, 101u}) {
    const auto g = Grid::uniform(m);
    EXPECT_NEAR(inner_product(Curve::constant(g, 1.0), Curve::constant(g, 1.0)), 1.0, 1e-12);
  }
  const auto nonuniform = Grid::make({0.0, 0.01, 0.3, 0.31, 0.8, 1.0});
  EXPECT_NEAR(inner_product(Curve::constant(nonuniform, 1.0), Curve::constant(nonuniform, 1.0)), 1.0, 1e-12);
}

TEST(InnerProduct, FourierElementHasUnitNorm) {
  const auto g = Grid::uniform(201);
  const Curve f = sqrt2_sin(g);
  EXPECT_NEAR(inner_product(f, f), 1.0, 1e-4);
  EXPECT_NEAR(l2_norm(f), 1.0, 1e-4);
}

TEST(InnerProduct, LinearTimesConstant) {
  const auto g = Grid::uniform(201);
  const Curve t = Curve::from_function(g, [](double x) { return x; });
  EXPECT_NEAR(inner_product(t, Curve::constant(g, 1.0)), 0.5, 1e-6);
  EXPECT_NEAR(l2_norm(t), 1.0 / std::sqrt(3.0), 1e-5);
}

TEST(InnerProduct, GridMismatch) {
  const Curve a = Curve::constant(Grid::uniform(5), 1.0);
  const Curve b = Curve::constant(Grid::uniform(6), 1.0);
  EXPECT_FDERIV_ERROR(inner_product(a, b), ErrorKind::GridMismatch);
  EXPECT_FDERIV_ERROR(axpy(1.0, a, b), ErrorKind::GridMismatch);
}

TEST(InnerProduct, EqualGridsByValueAreCompatible) {
  const Curve a = Curve::constant(Grid::uniform(5), 2.0);
  const Curve b = Curve::constant(Grid::uniform(5), 3.0);
  EXPECT_NEAR(inner_product(a, b), 6.0, 1e-12);
}

TEST(L2Norm, ZeroFunction) {
  const auto g = Grid::uniform(11);
  EXPECT_EQ(l2_norm(Curve::zero(g)), 0.0);
  EXPECT_GT(l2_norm(Curve(g, std::vector<double>{0, 0, 0, 0, 0, 1e-9, 0, 0, 0, 0, 0})), 0.0);
}

TEST(Axpy, IdentityCases) {
  const auto g = Grid::uniform(21);
  const Curve x = sqrt2_sin(g);
  const Curve y = Curve::from_function(g, [](double t) { return t * t; });

  const Curve a0 = axpy(0.0, x, y);
  EXPECT_TRUE(std::equal(a0.values().begin(), a0.values().end(), y.values().begin()));

  const Curve a1 = axpy(1.0, x, Curve::zero(g));
  EXPECT_TRUE(std::equal(a1.values().begin(), a1.values().end(), x.values().begin()));

  const Curve cancel = axpy(-1.0, x, x);
  for (double v : cancel.values()) EXPECT_EQ(v, 0.0);
}

TEST(Properties, CauchySchwarzAndBilinearity) {
  std::mt19937_64 gen(20261016);
  std::uniform_real_distribution<double> scale(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 40);
    const auto g = Grid::uniform(m);
    const Curve f = random_curve(g, gen);
    const Curve h = random_curve(g, gen);
    EXPECT_LE(std::abs(inner_product(f, h)), l2_norm(f) * l2_norm(h) + 1e-12);

    const double a = scale(gen);
    const double lhs = inner_product(a * f, h);
    const double rhs = a * inner_product(f, h);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    EXPECT_DOUBLE_EQ(inner_product(f, h), inner_product(h, f));
  }
}

TEST(Properties, TrapezoidRefinementIsSecondOrder) {
  // f = t^2, g = t^3 + 1: exact integral 1/6 + 1/3 = 1/2
  const double exact = 0.5;
  double prev_err = 0.0;
  std::size_t prev_m = 0;
  for (std::size_t m : {11u, 21u, 41u, 81u}) {
    const auto grid = Grid::uniform(m);
    const Curve f = Curve::from_function(grid, [](double t) { return t * t; });
    const Curve g = Curve::from_function(grid, [](double t) { return t * t * t + 1.0; });
    const double err = std::abs(inner_product(f, g) - exact);
    if (prev_m) {
      // halving the step should cut the error by ~4
      EXPECT_NEAR(prev_err / err, 4.0, 0.2) << "m = " << m;
    }
    prev_err = err;
    prev_m = m;
  }
}
