#pragma once

// Functional derivative components along estimated eigendirections.
//
// For an evaluation curve x and component j the estimate is a ratio of
// pair sums over ordered pairs (i1, i2), i1 != i2, with positive score
// difference d = xi_{i1 j} - xi_{i2 j}:
//
//   gamma_xj = sum (Y_i1 - Y_i2) w / sum d w,
//   w = K(||x - X_i1|| / h1) K(||x - X_i2|| / h1) K(Q / h2),
//   Q = 1 - d^2 / ||X_i1 - X_i2||^2.
//
// Q is the share of the pair difference not aligned with psi_j.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fderiv/error.hpp"
#include "fderiv/fpca.hpp"
#include "fderiv/function_space.hpp"
#include "fderiv/regression.hpp"

namespace fderiv {

/// h1 gates proximity to x (L2 units), h2 gates alignment (Q is in [0,1]).
struct DerivBandwidths {
  double h1 = 1.0;
  double h2 = 0.25;
};

inline void validate(const DerivBandwidths& bw) {
  require(bw.h1 > 0.0 && std::isfinite(bw.h1), ErrorKind::InvalidArgument, "h1 must be positive");
  require(bw.h2 > 0.0 && bw.h2 <= 1.0, ErrorKind::InvalidArgument, "h2 must be in (0, 1]");
}

/// Data-driven bandwidths. A fixed value overrides its quantile rule:
/// h1 = q1-quantile of ||X_i - mean||, h2 = q2-quantile of Q over the
/// unordered pairs whose curves both pass the h1 gate at x.
struct BandwidthPolicy {
  std::optional<double> h1;
  std::optional<double> h2;
  double q1 = 0.5;
  double q2 = 0.25;
};

/// Gamma estimates at one point. A component with no usable pair is absent
/// (nullopt), never zero.
struct DerivativeEstimate {
  Curve at;
  std::vector<std::optional<double>> gammas;
  std::vector<std::size_t> pair_counts;
  std::vector<DerivBandwidths> bandwidths;
  std::vector<Curve> directions;  // psi_j for the estimated components

  std::size_t components() const noexcept { return gammas.size(); }
  bool complete() const {
    return std::all_of(gammas.begin(), gammas.end(), [](const auto& g) { return g.has_value(); });
  }
};

struct GammaResult {
  double gamma = 0.0;
  std::size_t pair_count = 0;
};

/// Share of ||diff||^2 orthogonal to psi (psi unit-norm), clamped to [0,1].
inline double alignment_q(const Curve& diff, const Curve& psi) {
  const double nn = inner_product(diff, diff);
  if (!(nn > 0.0)) fail(ErrorKind::ZeroDifference, "alignment of a zero difference is undefined");
  const double p = inner_product(diff, psi);
  return std::clamp(1.0 - p * p / nn, 0.0, 1.0);
}

inline double pair_weight(const Curve& x, const Curve& xi1, const Curve& xi2, const Curve& psi_j,
                          const DerivBandwidths& bw, const KernelSpec& kernel) {
  validate(bw);
  const Curve diff = xi1 - xi2;
  const double q = alignment_q(diff, psi_j);
  const double k1 = kernel_eval(kernel, distance(x, xi1) / bw.h1);
  if (k1 == 0.0) return 0.0;
  const double k2 = kernel_eval(kernel, distance(x, xi2) / bw.h1);
  if (k2 == 0.0) return 0.0;
  return k1 * k2 * kernel_eval(kernel, q / bw.h2);
}

namespace detail {

// Curves with positive proximity weight at x, plus their pairwise squared
// distances. Shared across components of one evaluation point.
struct Neighborhood {
  std::vector<std::size_t> index;
  std::vector<double> weight;
  Eigen::MatrixXd sq_dist;
};

inline Neighborhood neighborhood(const Curve& x, const Sample& sample, double h1, const KernelSpec& kernel) {
  Neighborhood nb;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double k = kernel_eval(kernel, distance(x, sample.curves[i]) / h1);
    if (k > 0.0) {
      nb.index.push_back(i);
      nb.weight.push_back(k);
    }
  }
  const std::size_t a = nb.index.size();
  nb.sq_dist = Eigen::MatrixXd::Zero(a, a);
  for (std::size_t p = 0; p < a; ++p)
    for (std::size_t r = p + 1; r < a; ++r) {
      const double v = squared_distance(sample.curves[nb.index[p]], sample.curves[nb.index[r]]);
      nb.sq_dist(p, r) = v;
      nb.sq_dist(r, p) = v;
    }
  return nb;
}

inline double pair_q(double score_diff, double sq_dist) {
  return std::clamp(1.0 - score_diff * score_diff / sq_dist, 0.0, 1.0);
}

inline void check_inputs(const Sample& sample, std::span<const double> responses, const EigenSystem& eig,
                         std::size_t component) {
  require(component < eig.components(), ErrorKind::InvalidArgument, "component index exceeds the eigen system");
  require(responses.size() == sample.size(), ErrorKind::InvalidArgument, "responses and sample differ in length");
  require(static_cast<std::size_t>(eig.scores.rows()) == sample.size(), ErrorKind::InvalidArgument,
          "eigen system scores do not belong to this sample");
}

// Pair sums in a fixed (p, r) loop order so repeated runs are bit-identical.
inline std::optional<GammaResult> gamma_from_neighborhood(const Neighborhood& nb, std::span<const double> responses,
                                                          const EigenSystem& eig, std::size_t component, double h2,
                                                          const KernelSpec& kernel) {
  const auto col = static_cast<Eigen::Index>(component);
  double num = 0.0;
  double den = 0.0;
  std::size_t count = 0;
  const std::size_t a = nb.index.size();
  for (std::size_t p = 0; p < a; ++p) {
    const std::size_t i1 = nb.index[p];
    for (std::size_t r = 0; r < a; ++r) {
      if (r == p) continue;
      const std::size_t i2 = nb.index[r];
      const double d = eig.scores(static_cast<Eigen::Index>(i1), col) - eig.scores(static_cast<Eigen::Index>(i2), col);
      if (!(d > 0.0)) continue;
      const double sq = nb.sq_dist(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
      if (!(sq > 0.0)) continue;
      const double kq = kernel_eval(kernel, pair_q(d, sq) / h2);
      const double w = nb.weight[p] * nb.weight[r] * kq;
      if (!(w > 0.0)) continue;
      num += (responses[i1] - responses[i2]) * w;
      den += d * w;
      ++count;
    }
  }
  if (count == 0 || den <= 1e-12) return std::nullopt;
  return GammaResult{num / den, count};
}

inline double default_h1(const Sample& sample, const EigenSystem& eig, double q1) {
  std::vector<double> r;
  r.reserve(sample.size());
  for (const Curve& c : sample.curves) r.push_back(distance(c, eig.mean));
  const double h = quantile(std::move(r), q1);
  require(h > 0.0, ErrorKind::InvalidArgument, "h1 quantile is zero; all curves equal the mean");
  return h;
}

inline double default_h2(const Neighborhood& nb, const EigenSystem& eig, std::size_t component, double q2) {
  const auto col = static_cast<Eigen::Index>(component);
  std::vector<double> qs;
  const std::size_t a = nb.index.size();
  for (std::size_t p = 0; p < a; ++p)
    for (std::size_t r = p + 1; r < a; ++r) {
      const double sq = nb.sq_dist(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
      if (!(sq > 0.0)) continue;
      const double d = eig.scores(static_cast<Eigen::Index>(nb.index[p]), col) -
                       eig.scores(static_cast<Eigen::Index>(nb.index[r]), col);
      qs.push_back(pair_q(d, sq));
    }
  if (qs.empty()) return 1.0;
  double h = quantile(qs, q2);
  if (h <= 0.0) {
    // every quantile-level pair is perfectly aligned; fall back to the smallest positive Q
    double smallest = 1.0;
    for (double v : qs)
      if (v > 0.0) smallest = std::min(smallest, v);
    h = smallest;
  }
  return std::min(h, 1.0);
}

}  // namespace detail

/// Pair-ratio estimate of component `component` (0-based) at x.
/// Throws EmptyPairNeighborhood when no pair carries weight.
inline GammaResult gamma_hat(const Curve& x, std::size_t component, const Sample& sample,
                             std::span<const double> responses, const EigenSystem& eig, const DerivBandwidths& bw,
                             const KernelSpec& kernel) {
  validate(bw);
  detail::check_inputs(sample, responses, eig, component);
  require_same_grid(x, eig.mean);
  const auto nb = detail::neighborhood(x, sample, bw.h1, kernel);
  const auto r = detail::gamma_from_neighborhood(nb, responses, eig, component, bw.h2, kernel);
  if (!r)
    fail(ErrorKind::EmptyPairNeighborhood,
         "no weighted pair for component " + std::to_string(component + 1) + "; bandwidths too small");
  return *r;
}

/// Bandwidths the policy resolves to at x for one component.
inline DerivBandwidths resolve_bandwidths(const Curve& x, std::size_t component, const Sample& sample,
                                          const EigenSystem& eig, const BandwidthPolicy& policy,
                                          const KernelSpec& kernel) {
  DerivBandwidths bw;
  bw.h1 = policy.h1 ? *policy.h1 : detail::default_h1(sample, eig, policy.q1);
  if (policy.h2) {
    bw.h2 = *policy.h2;
  } else {
    const auto nb = detail::neighborhood(x, sample, bw.h1, kernel);
    bw.h2 = detail::default_h2(nb, eig, component, policy.q2);
  }
  validate(bw);
  return bw;
}

/// Leading `components` gamma estimates at x with fixed bandwidths.
inline DerivativeEstimate gradient_at(const Curve& x, const Sample& sample, std::span<const double> responses,
                                      const EigenSystem& eig, const DerivBandwidths& bw, const KernelSpec& kernel,
                                      std::size_t components) {
  validate(bw);
  require(components <= eig.components(), ErrorKind::InvalidArgument, "more components requested than estimated");
  require_same_grid(x, eig.mean);
  DerivativeEstimate est{x, {}, {}, {}, {}};
  const auto nb = detail::neighborhood(x, sample, bw.h1, kernel);
  for (std::size_t j = 0; j < components; ++j) {
    detail::check_inputs(sample, responses, eig, j);
    const auto r = detail::gamma_from_neighborhood(nb, responses, eig, j, bw.h2, kernel);
    est.gammas.push_back(r ? std::optional<double>(r->gamma) : std::nullopt);
    est.pair_counts.push_back(r ? r->pair_count : 0);
    est.bandwidths.push_back(bw);
    est.directions.push_back(eig.eigenfunctions[j]);
  }
  return est;
}

/// Same, with bandwidths resolved per component by the policy.
inline DerivativeEstimate gradient_at(const Curve& x, const Sample& sample, std::span<const double> responses,
                                      const EigenSystem& eig, const BandwidthPolicy& policy, const KernelSpec& kernel,
                                      std::size_t components) {
  require(components <= eig.components(), ErrorKind::InvalidArgument, "more components requested than estimated");
  require_same_grid(x, eig.mean);
  DerivBandwidths base;
  base.h1 = policy.h1 ? *policy.h1 : detail::default_h1(sample, eig, policy.q1);
  require(base.h1 > 0.0, ErrorKind::InvalidArgument, "h1 must be positive");
  const auto nb = detail::neighborhood(x, sample, base.h1, kernel);

  DerivativeEstimate est{x, {}, {}, {}, {}};
  for (std::size_t j = 0; j < components; ++j) {
    detail::check_inputs(sample, responses, eig, j);
    DerivBandwidths bw = base;
    bw.h2 = policy.h2 ? *policy.h2 : detail::default_h2(nb, eig, j, policy.q2);
    validate(bw);
    const auto r = detail::gamma_from_neighborhood(nb, responses, eig, j, bw.h2, kernel);
    est.gammas.push_back(r ? std::optional<double>(r->gamma) : std::nullopt);
    est.pair_counts.push_back(r ? r->pair_count : 0);
    est.bandwidths.push_back(bw);
    est.directions.push_back(eig.eigenfunctions[j]);
  }
  return est;
}

/// sum_j e_j gamma_j for a unit coefficient vector e.
inline double directional_derivative(const DerivativeEstimate& est, std::span<const double> e) {
  require(e.size() <= est.components(), ErrorKind::InvalidDirection, "direction has more coefficients than gammas");
  double norm2 = 0.0;
  for (double v : e) norm2 += v * v;
  require(std::abs(norm2 - 1.0) <= 1e-8, ErrorKind::InvalidDirection, "direction is not unit length");
  double s = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (e[j] == 0.0) continue;
    if (!est.gammas[j]) fail(ErrorKind::MissingComponent, "component " + std::to_string(j + 1) + " is absent");
    s += e[j] * *est.gammas[j];
  }
  return s;
}

/// gamma / ||gamma|| over available components; absent components get 0.
inline std::vector<double> steepest_direction(const DerivativeEstimate& est) {
  double norm2 = 0.0;
  bool any = false;
  for (const auto& g : est.gammas)
    if (g) {
      any = true;
      norm2 += *g * *g;
    }
  require(any, ErrorKind::MissingComponent, "no component is available");
  if (!(norm2 > 0.0)) fail(ErrorKind::ZeroGradient, "gradient vanishes in the truncated span");
  const double norm = std::sqrt(norm2);
  std::vector<double> out(est.components(), 0.0);
  for (std::size_t j = 0; j < out.size(); ++j)
    if (est.gammas[j]) out[j] = *est.gammas[j] / norm;
  return out;
}

/// The curve sum_j gamma_j psi_j; its inner product with a unit direction in
/// the span is the directional derivative.
inline Curve derivative_generating_function(const DerivativeEstimate& est, std::size_t components) {
  require(components <= est.components(), ErrorKind::InvalidArgument, "more components requested than estimated");
  Curve out = Curve::zero(est.at.grid());
  for (std::size_t j = 0; j < components; ++j) {
    if (!est.gammas[j]) fail(ErrorKind::MissingComponent, "component " + std::to_string(j + 1) + " is absent");
    out = axpy(*est.gammas[j], est.directions[j], out);
  }
  return out;
}

}  // namespace fderiv
