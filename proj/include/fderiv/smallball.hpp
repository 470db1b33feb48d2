#pragma once

// Small-ball probability law for processes with exponentially decaying
// eigenvalues, log(theta_j) ~ -B j^beta, and score laws with
// P(|eta| <= u) ~ u^b near zero.
//
//   pi(u) = exp{ -(b beta / (beta + 1)) (2 / B)^(1/beta) |log u|^((beta+1)/beta) }
//
// P(||X|| <= u) = pi(u)^(1 + o(1)) as u -> 0. The o(1) terms are dropped
// everywhere here; compare against Monte Carlo on the log scale only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fderiv/error.hpp"
#include "fderiv/rng.hpp"

namespace fderiv {

struct SmallBallParams {
  double B = 2.0;
  double beta = 1.0;
  double b = 1.0;
};

inline void validate(const SmallBallParams& p) {
  require(p.B > 0.0 && p.beta > 0.0 && p.b > 0.0, ErrorKind::InvalidArgument,
          "small-ball parameters must be strictly positive");
}

/// log pi(u).
inline double log_pi_u(double u, const SmallBallParams& p) {
  validate(p);
  require(u > 0.0 && u < 1.0, ErrorKind::InvalidArgument, "u must lie in (0,1)");
  const double lead = p.b * p.beta / (p.beta + 1.0) * std::pow(2.0 / p.B, 1.0 / p.beta);
  return -lead * std::pow(std::abs(std::log(u)), (p.beta + 1.0) / p.beta);
}

inline double pi_u(double u, const SmallBallParams& p) { return std::exp(log_pi_u(u, p)); }

/// Draws per independent substream of the Monte Carlo estimate.
inline constexpr std::size_t kSmallBallChunk = 1u << 16;

/// Fraction of draws of sum_j theta_j eta_j^2 (eta iid N(0,1)) that are <= u^2.
/// Chunk c of the draws uses stream (seed, small_ball, c), so the count does
/// not depend on how chunks are scheduled.
inline double mc_small_ball(std::span<const double> eigenvalues, std::size_t n_mc, double u, std::uint64_t seed) {
  require(n_mc >= 1, ErrorKind::InvalidArgument, "need at least one Monte Carlo draw");
  require(!eigenvalues.empty(), ErrorKind::InvalidArgument, "need at least one eigenvalue");
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    require(eigenvalues[j] > 0.0, ErrorKind::InvalidArgument, "eigenvalues must be positive");
    if (j > 0) require(eigenvalues[j] <= eigenvalues[j - 1], ErrorKind::InvalidArgument, "eigenvalues must descend");
  }
  require(u >= 0.0, ErrorKind::InvalidArgument, "radius must be nonnegative");
  const double u2 = u * u;

  std::uint64_t hits = 0;
  const std::size_t chunks = (n_mc + kSmallBallChunk - 1) / kSmallBallChunk;
  for (std::size_t c = 0; c < chunks; ++c) {
    auto gen = make_stream(seed, StreamTag::small_ball, c);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t draws = std::min(kSmallBallChunk, n_mc - c * kSmallBallChunk);
    for (std::size_t d = 0; d < draws; ++d) {
      double s = 0.0;
      for (double theta : eigenvalues) {
        const double eta = normal(gen);
        s += theta * eta * eta;
      }
      if (s <= u2) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(n_mc);
}

/// Exponent of the mean-square rate h^(2 alpha) as a function of log n:
/// -2 alpha ((beta+1)/(b beta))^(beta/(beta+1)) (B/2)^(1/(beta+1)) (log n)^(beta/(beta+1)).
inline double log_rate_bound(double log_n, double alpha, const SmallBallParams& p) {
  validate(p);
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0,1]");
  require(log_n >= std::log(2.0), ErrorKind::InvalidArgument, "n must be at least 2");
  const double e = p.beta / (p.beta + 1.0);
  return -2.0 * alpha * std::pow((p.beta + 1.0) / (p.b * p.beta), e) * std::pow(p.B / 2.0, 1.0 / (p.beta + 1.0)) *
         std::pow(log_n, e);
}

inline double rate_bound(double n, double alpha, const SmallBallParams& p) {
  require(n >= 2.0, ErrorKind::InvalidArgument, "n must be at least 2");
  return std::exp(log_rate_bound(std::log(n), alpha, p));
}

}  // namespace fderiv
