#pragma once

// Functional Nadaraya-Watson regression with L2 distances and leave-one-out
// bandwidth selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fderiv/error.hpp"
#include "fderiv/fpca.hpp"
#include "fderiv/function_space.hpp"

namespace fderiv {

enum class KernelFamily { uniform, triangular, quadratic };

/// Nonincreasing kernel on [0, c], zero beyond c.
struct KernelSpec {
  KernelFamily family = KernelFamily::quadratic;
  double support_c = 1.0;
};

inline KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "uniform") return KernelFamily::uniform;
  if (name == "triangular") return KernelFamily::triangular;
  if (name == "quadratic") return KernelFamily::quadratic;
  fail(ErrorKind::InvalidArgument, "unknown kernel family '" + std::string(name) + "'");
}

constexpr std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::uniform: return "uniform";
    case KernelFamily::triangular: return "triangular";
    case KernelFamily::quadratic: return "quadratic";
  }
  return "unknown";
}

inline double kernel_eval(const KernelSpec& kernel, double u) {
  require(u >= 0.0, ErrorKind::InvalidArgument, "kernel argument must be nonnegative");
  require(kernel.support_c > 0.0, ErrorKind::InvalidArgument, "kernel support must be positive");
  const double c = kernel.support_c;
  if (u > c) return 0.0;
  switch (kernel.family) {
    case KernelFamily::uniform: return 1.0;
    case KernelFamily::triangular: return std::max(0.0, 1.0 - u / c);
    case KernelFamily::quadratic: {
      const double r = u / c;
      return std::max(0.0, 1.0 - r * r);
    }
  }
  return 0.0;
}

struct RegressionFit {
  Sample sample;
  std::vector<double> responses;
  KernelSpec kernel;
  double bandwidth = 1.0;
};

inline void validate(const RegressionFit& fit) {
  require(fit.responses.size() == fit.sample.size(), ErrorKind::InvalidArgument,
          "responses and sample differ in length");
  require(fit.bandwidth > 0.0 && std::isfinite(fit.bandwidth), ErrorKind::InvalidArgument,
          "bandwidth must be positive");
}

/// Weighted response average with weights K(||x - X_i|| / h).
inline double nw_estimate(const RegressionFit& fit, const Curve& x) {
  validate(fit);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < fit.sample.size(); ++i) {
    const double k = kernel_eval(fit.kernel, distance(x, fit.sample.curves[i]) / fit.bandwidth);
    num += k * fit.responses[i];
    den += k;
  }
  if (!(den > 0.0)) fail(ErrorKind::EmptyNeighborhood, "no sample curve lies within the bandwidth of x");
  return num / den;
}

/// Symmetric n x n matrix of L2 distances between sample curves.
inline Eigen::MatrixXd pairwise_distances(const Sample& sample) {
  const std::size_t n = sample.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = distance(sample.curves[i], sample.curves[j]);
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

/// Linear-interpolation quantile (type 7) of an unsorted list.
inline double quantile(std::vector<double> values, double q) {
  require(!values.empty(), ErrorKind::InvalidArgument, "quantile of an empty list");
  require(q >= 0.0 && q <= 1.0, ErrorKind::InvalidArgument, "quantile level must be in [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

/// Population variance (divisor n).
inline double response_variance(std::span<const double> y) {
  if (y.empty()) return 0.0;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double s = 0.0;
  for (double v : y) s += (v - mean) * (v - mean);
  return s / static_cast<double>(y.size());
}

/// Leave-one-out squared error for one bandwidth, from precomputed distances.
/// Curves with an empty leave-one-out neighborhood add `penalty`.
inline double loo_score(const Eigen::MatrixXd& distances, std::span<const double> responses, const KernelSpec& kernel,
                        double h, double penalty) {
  const auto n = static_cast<std::size_t>(distances.rows());
  double score = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double k = kernel_eval(kernel, distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / h);
      num += k * responses[j];
      den += k;
    }
    if (den > 0.0) {
      const double r = responses[i] - num / den;
      score += r * r;
    } else {
      score += penalty;
    }
  }
  return score;
}

struct CvResult {
  double bandwidth = 0.0;
  std::vector<double> candidates;
  std::vector<double> scores;
};

/// Candidate minimizing leave-one-out error; ties go to the smaller bandwidth.
inline CvResult cv_bandwidth_detail(const Sample& sample, std::span<const double> responses, const KernelSpec& kernel,
                                    std::span<const double> candidates) {
  require(!candidates.empty(), ErrorKind::InvalidArgument, "no bandwidth candidates");
  require(responses.size() == sample.size(), ErrorKind::InvalidArgument, "responses and sample differ in length");
  for (double h : candidates) require(h > 0.0, ErrorKind::InvalidArgument, "bandwidth candidates must be positive");

  CvResult out;
  out.candidates.assign(candidates.begin(), candidates.end());
  out.scores.resize(candidates.size());
  if (candidates.size() == 1) {
    out.bandwidth = candidates[0];
    out.scores[0] = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const Eigen::MatrixXd d = pairwise_distances(sample);
  const double penalty = response_variance(responses);
  for (std::size_t c = 0; c < candidates.size(); ++c)
    out.scores[c] = loo_score(d, responses, kernel, candidates[c], penalty);

  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    if (out.scores[c] < out.scores[best] || (out.scores[c] == out.scores[best] && candidates[c] < candidates[best]))
      best = c;
  }
  out.bandwidth = candidates[best];
  return out;
}

inline double cv_bandwidth(const Sample& sample, std::span<const double> responses, const KernelSpec& kernel,
                           std::span<const double> candidates) {
  return cv_bandwidth_detail(sample, responses, kernel, candidates).bandwidth;
}

/// `count` log-spaced values between the 1st and 50th percentiles of the
/// pairwise distances ||X_i - X_j||, i < j.
inline std::vector<double> default_bandwidth_candidates(const Sample& sample, std::size_t count = 10) {
  require(sample.size() >= 2, ErrorKind::InsufficientSample, "bandwidth candidates need at least 2 curves");
  require(count >= 1, ErrorKind::InvalidArgument, "candidate count must be positive");
  std::vector<double> dists;
  dists.reserve(sample.size() * (sample.size() - 1) / 2);
  double smallest_positive = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sample.size(); ++i)
    for (std::size_t j = i + 1; j < sample.size(); ++j) {
      const double v = distance(sample.curves[i], sample.curves[j]);
      dists.push_back(v);
      if (v > 0.0) smallest_positive = std::min(smallest_positive, v);
    }
  require(std::isfinite(smallest_positive), ErrorKind::InvalidArgument, "all sample curves coincide");
  double lo = quantile(dists, 0.01);
  double hi = quantile(std::move(dists), 0.50);
  if (lo <= 0.0) lo = smallest_positive;
  if (hi < lo) hi = lo;
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = hi;
    return out;
  }
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (std::size_t c = 0; c < count; ++c)
    out[c] = std::exp(llo + (lhi - llo) * static_cast<double>(c) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace fderiv
