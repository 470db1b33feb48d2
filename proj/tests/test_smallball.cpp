#include <cmath>

#include <gtest/gtest.h>

#include "fderiv/simulate.hpp"
#include "fderiv/smallball.hpp"
#include "test_helpers.hpp"

using namespace fderiv;

TEST(SmallBallLaw, Examples) {
  const SmallBallParams p{2.0, 1.0, 1.0};
  EXPECT_NEAR(pi_u(std::exp(-1.0), p), 0.60653, 1e-5);
  EXPECT_NEAR(pi_u(1.0 - 1e-9, p), 1.0, 1e-12);

  const SmallBallParams doubled{2.0, 1.0, 2.0};
  for (double u : {0.5, 0.1, 1e-3}) EXPECT_NEAR(log_pi_u(u, doubled), 2.0 * log_pi_u(u, p), 1e-12);

  EXPECT_FDERIV_ERROR(pi_u(0.0, p), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(pi_u(1.0, p), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(pi_u(0.5, SmallBallParams{2.0, 0.0, 1.0}), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(pi_u(0.5, SmallBallParams{-1.0, 1.0, 1.0}), ErrorKind::InvalidArgument);
}

TEST(SmallBallLaw, MonotoneInRadius) {
  for (const SmallBallParams p : {SmallBallParams{2.0, 1.0, 1.0}, SmallBallParams{0.5, 2.0, 1.5}, SmallBallParams{3.0, 0.5, 0.7}}) {
    double prev = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double v = pi_u(k / 200.0, p);
      EXPECT_GE(v, prev);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(MonteCarlo, ExtremeRadii) {
  const auto theta = exponential_eigenvalues(25, 2.0, 1.0);
  EXPECT_EQ(mc_small_ball(theta, 10000, 1e6, 3), 1.0);
  EXPECT_EQ(mc_small_ball(theta, 10000, 0.0, 3), 0.0);
  EXPECT_FDERIV_ERROR(mc_small_ball(theta, 0, 0.5, 3), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(mc_small_ball(theta, 10, -0.5, 3), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(mc_small_ball(std::vector<double>{0.1, 0.2}, 10, 0.5, 3), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(mc_small_ball(std::vector<double>{0.1, 0.0}, 10, 0.5, 3), ErrorKind::InvalidArgument);
}

TEST(MonteCarlo, DeterministicAndMonotone) {
  const auto theta = exponential_eigenvalues(25, 2.0, 1.0);
  EXPECT_EQ(mc_small_ball(theta, 70000, 0.3, 9), mc_small_ball(theta, 70000, 0.3, 9));
  double prev = 0.0;
  for (double u : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8}) {
    const double v = mc_small_ball(theta, 70000, u, 9);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(MonteCarlo, MatchesIndependentReference) {
  // Reference: numpy pilot (tests/oracles/smallball_pilot.py), theta_j = exp(-2j),
  // J = 25, 1e6 draws: P(||X|| <= 0.1) = 0.06907, log-ratio to log pi(0.1) = 1.008.
  // Standard error at this size is 2.5e-4; the band is six of them.
  const auto theta = exponential_eigenvalues(25, 2.0, 1.0);
  const double p_hat = mc_small_ball(theta, 1000000, 0.1, 12345);
  EXPECT_NEAR(p_hat, 0.06907, 1.5e-3);
  const double ratio = std::log(p_hat) / log_pi_u(0.1, SmallBallParams{});
  EXPECT_GE(ratio, 0.9);
  EXPECT_LE(ratio, 1.1);
  // within 35% of the law on the exponent scale
  EXPECT_NEAR(ratio, 1.0, 0.35);
}

TEST(MonteCarlo, TruncationStable) {
  const auto t25 = exponential_eigenvalues(25, 2.0, 1.0);
  const auto t50 = exponential_eigenvalues(50, 2.0, 1.0);
  const double a = mc_small_ball(t25, 400000, 0.2, 77);
  const double b = mc_small_ball(t50, 400000, 0.2, 78);
  const double se = std::sqrt(a * (1.0 - a) / 400000.0);
  EXPECT_NEAR(a, b, 5.0 * std::sqrt(2.0) * se);
}

TEST(RateBound, Examples) {
  const SmallBallParams p{2.0, 1.0, 1.0};
  EXPECT_NEAR(log_rate_bound(100.0, 1.0, p), -20.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(log_rate_bound(100.0, 0.5, p), -10.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::log(rate_bound(1e6, 1.0, p)), log_rate_bound(std::log(1e6), 1.0, p), 1e-12);
  EXPECT_FDERIV_ERROR(rate_bound(1.0, 1.0, p), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(log_rate_bound(10.0, 0.0, p), ErrorKind::InvalidArgument);
  EXPECT_FDERIV_ERROR(log_rate_bound(10.0, 1.5, p), ErrorKind::InvalidArgument);
}

TEST(RateBound, SlowerThanAnyPolynomial) {
  // log(bound * n^eps) increases once log n is large; checked on the log scale
  for (const SmallBallParams p : {SmallBallParams{2.0, 1.0, 1.0}, SmallBallParams{1.0, 2.0, 0.5}}) {
    for (double eps : {0.1, 0.5}) {
      double prev = -INFINITY;
      for (double log_n : {1e5, 1e6, 1e8}) {
        const double v = log_rate_bound(log_n, 1.0, p) + eps * log_n;
        EXPECT_GT(v, prev) << "eps " << eps << " log n " << log_n;
        prev = v;
      }
    }
    double prev = 0.0;
    for (double n : {1e2, 1e4, 1e8}) {
      const double v = rate_bound(n, 1.0, p);
      if (prev > 0.0) EXPECT_LT(v, prev);
      prev = v;
    }
  }
}
