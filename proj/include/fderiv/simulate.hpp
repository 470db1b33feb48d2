#pragma once

// Synthetic functional regression data with known truth: Karhunen-Loeve
// synthesis on a Fourier basis and functionals with analytic derivatives.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fderiv/error.hpp"
#include "fderiv/fpca.hpp"
#include "fderiv/function_space.hpp"
#include "fderiv/rng.hpp"

namespace fderiv {

/// phi_1 = 1, phi_2k = sqrt2 sin(2 pi k t), phi_2k+1 = sqrt2 cos(2 pi k t).
inline Curve fourier_element(const GridPtr& grid, std::size_t j) {
  require(j >= 1, ErrorKind::InvalidArgument, "Fourier elements are numbered from 1");
  if (j == 1) return Curve::constant(grid, 1.0);
  const double k = static_cast<double>(j / 2);
  const bool sine = j % 2 == 0;
  return Curve::from_function(grid, [&](double t) {
    const double a = 2.0 * std::numbers::pi * k * t;
    return std::numbers::sqrt2 * (sine ? std::sin(a) : std::cos(a));
  });
}

inline std::vector<Curve> fourier_basis(const GridPtr& grid, std::size_t count) {
  std::vector<Curve> out;
  out.reserve(count);
  for (std::size_t j = 1; j <= count; ++j) out.push_back(fourier_element(grid, j));
  return out;
}

enum class ScoreDistribution { gaussian, uniform_symmetric };

struct ProcessSpec {
  GridPtr grid;
  std::vector<double> eigenvalues;  // theta_j, descending
  Curve mean;
  ScoreDistribution scores = ScoreDistribution::gaussian;
  std::string name;

  std::size_t components() const noexcept { return eigenvalues.size(); }
  std::vector<Curve> basis() const { return fourier_basis(grid, eigenvalues.size()); }
};

inline void validate(const ProcessSpec& spec) {
  require(spec.grid != nullptr, ErrorKind::InvalidArgument, "process has no grid");
  require(same_grid(spec.grid, spec.mean.grid()), ErrorKind::GridMismatch, "process mean is on another grid");
  for (std::size_t j = 0; j < spec.eigenvalues.size(); ++j) {
    require(spec.eigenvalues[j] >= 0.0, ErrorKind::InvalidArgument, "eigenvalues must be nonnegative");
    if (j > 0)
      require(spec.eigenvalues[j] <= spec.eigenvalues[j - 1], ErrorKind::InvalidArgument, "eigenvalues must descend");
  }
}

/// theta_j = exp(-B j^beta), j = 1..count.
inline std::vector<double> exponential_eigenvalues(std::size_t count, double B, double beta) {
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = std::exp(-B * std::pow(static_cast<double>(j + 1), beta));
  return out;
}

/// theta_j = j^-a, j = 1..count.
inline std::vector<double> polynomial_eigenvalues(std::size_t count, double a) {
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = std::pow(static_cast<double>(j + 1), -a);
  return out;
}

/// Named presets: "expdecay-b<B>-beta<beta>" and "poly-a<a>", zero mean,
/// `count` Fourier components.
inline ProcessSpec preset_process(std::string_view name, const GridPtr& grid, std::size_t count = 21) {
  static const std::regex expdecay(R"(expdecay-b([0-9]*\.?[0-9]+)-beta([0-9]*\.?[0-9]+))");
  static const std::regex poly(R"(poly-a([0-9]*\.?[0-9]+))");
  const std::string s(name);
  std::smatch m;
  require(count >= 1 && 2 * (count / 2) < grid->size(), ErrorKind::InvalidArgument,
          "grid too coarse for the requested number of Fourier components");
  if (std::regex_match(s, m, expdecay)) {
    return ProcessSpec{grid, exponential_eigenvalues(count, std::stod(m[1]), std::stod(m[2])), Curve::zero(grid),
                       ScoreDistribution::gaussian, s};
  }
  if (std::regex_match(s, m, poly)) {
    return ProcessSpec{grid, polynomial_eigenvalues(count, std::stod(m[1])), Curve::zero(grid),
                       ScoreDistribution::gaussian, s};
  }
  fail(ErrorKind::InvalidArgument, "unknown process preset '" + s + "'");
}

/// X_i = mean + sum_j sqrt(theta_j) eta_ij phi_j, unit-variance eta_ij.
/// Curve i draws from stream (seed, process_scores, i).
inline Sample sample_process(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  require(n >= 1, ErrorKind::InvalidArgument, "need at least one curve");
  const std::vector<Curve> basis = spec.basis();
  std::vector<Curve> curves;
  curves.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto gen = make_stream(seed, StreamTag::process_scores, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-std::sqrt(3.0), std::sqrt(3.0));
    Curve x = spec.mean;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double eta = spec.scores == ScoreDistribution::gaussian ? normal(gen) : uniform(gen);
      x = axpy(std::sqrt(spec.eigenvalues[j]) * eta, basis[j], x);
    }
    curves.push_back(std::move(x));
  }
  return make_sample(std::move(curves));
}

enum class FunctionalKind { linear, quadratic, norm_nonlinear };

/// Scalar maps for g(x) = f(||x - center||^2).
enum class NormMap { identity, sine, exp_decay };

/// Regression functional with an analytic derivative.
///   linear:          g(x) = a + <b, x>
///   quadratic:       g(x) = a + <b, x> + sum_kl w_kl c_k(x) c_l(x),  c_k(x) = <x - center, basis_k>
///   norm_nonlinear:  g(x) = a + f(||x - center||^2)
/// The linear part of the quadratic kind defaults to zero.
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::linear;
  double intercept = 0.0;
  std::optional<Curve> slope;
  Eigen::MatrixXd w;
  std::vector<Curve> basis;
  std::optional<Curve> center;
  NormMap map = NormMap::identity;
  double map_scale = 1.0;

  static FunctionalSpec linear(double a, Curve b) {
    FunctionalSpec f;
    f.kind = FunctionalKind::linear;
    f.intercept = a;
    f.slope = std::move(b);
    return f;
  }

  static FunctionalSpec quadratic(Eigen::MatrixXd w, std::vector<Curve> basis, Curve center,
                                  std::optional<Curve> slope = std::nullopt, double a = 0.0) {
    FunctionalSpec f;
    f.kind = FunctionalKind::quadratic;
    f.w = std::move(w);
    f.basis = std::move(basis);
    f.center = std::move(center);
    f.slope = std::move(slope);
    f.intercept = a;
    return f;
  }

  static FunctionalSpec norm_nonlinear(NormMap map, Curve center, double scale = 1.0, double a = 0.0) {
    FunctionalSpec f;
    f.kind = FunctionalKind::norm_nonlinear;
    f.map = map;
    f.map_scale = scale;
    f.center = std::move(center);
    f.intercept = a;
    return f;
  }
};

inline void validate(const FunctionalSpec& f) {
  if (f.kind == FunctionalKind::linear)
    require(f.slope.has_value(), ErrorKind::InvalidArgument, "linear functional needs a slope curve");
  if (f.kind == FunctionalKind::quadratic) {
    require(f.center.has_value(), ErrorKind::InvalidArgument, "quadratic functional needs a center");
    require(f.w.rows() == f.w.cols() && static_cast<std::size_t>(f.w.rows()) <= f.basis.size(),
            ErrorKind::InvalidArgument, "quadratic coefficients must be square and fit the basis");
    require((f.w - f.w.transpose()).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::InvalidArgument,
            "quadratic coefficients must be symmetric");
  }
  if (f.kind == FunctionalKind::norm_nonlinear)
    require(f.center.has_value(), ErrorKind::InvalidArgument, "norm functional needs a center");
}

namespace detail {

inline double norm_map(NormMap map, double scale, double s) {
  switch (map) {
    case NormMap::identity: return scale * s;
    case NormMap::sine: return std::sin(scale * s);
    case NormMap::exp_decay: return std::exp(-scale * s);
  }
  return 0.0;
}

inline double norm_map_derivative(NormMap map, double scale, double s) {
  switch (map) {
    case NormMap::identity: return scale;
    case NormMap::sine: return scale * std::cos(scale * s);
    case NormMap::exp_decay: return -scale * std::exp(-scale * s);
  }
  return 0.0;
}

inline Eigen::VectorXd coordinates(const FunctionalSpec& f, const Curve& x) {
  const auto k = f.w.rows();
  Eigen::VectorXd c(k);
  const Curve centered = x - *f.center;
  for (Eigen::Index i = 0; i < k; ++i) c(i) = inner_product(centered, f.basis[static_cast<std::size_t>(i)]);
  return c;
}

}  // namespace detail

inline double evaluate(const FunctionalSpec& f, const Curve& x) {
  validate(f);
  double g = f.intercept;
  if (f.slope) g += inner_product(*f.slope, x);
  switch (f.kind) {
    case FunctionalKind::linear: break;
    case FunctionalKind::quadratic: {
      const Eigen::VectorXd c = detail::coordinates(f, x);
      g += c.dot(f.w * c);
      break;
    }
    case FunctionalKind::norm_nonlinear:
      g += detail::norm_map(f.map, f.map_scale, squared_distance(x, *f.center));
      break;
  }
  return g;
}

/// g_x applied to a direction y (the Frechet derivative at x).
inline double derivative_along(const FunctionalSpec& f, const Curve& x, const Curve& y) {
  validate(f);
  double d = f.slope ? inner_product(*f.slope, y) : 0.0;
  switch (f.kind) {
    case FunctionalKind::linear: break;
    case FunctionalKind::quadratic: {
      const Eigen::VectorXd c = detail::coordinates(f, x);
      Eigen::VectorXd yc(c.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) yc(i) = inner_product(y, f.basis[static_cast<std::size_t>(i)]);
      d += 2.0 * yc.dot(f.w * c);
      break;
    }
    case FunctionalKind::norm_nonlinear: {
      const Curve centered = x - *f.center;
      d += 2.0 * detail::norm_map_derivative(f.map, f.map_scale, inner_product(centered, centered)) *
           inner_product(centered, y);
      break;
    }
  }
  return d;
}

/// gamma_xj = g_x phi_j for the process basis element j (1-based).
inline double true_gamma(const FunctionalSpec& f, const Curve& x, const ProcessSpec& spec, std::size_t j) {
  require(j >= 1 && j <= spec.components(), ErrorKind::InvalidArgument, "component outside the process basis");
  return derivative_along(f, x, fourier_element(spec.grid, j));
}

/// Y_i = g(X_i) + sigma z_i, z from stream (seed, response_noise).
inline std::vector<double> gen_response(const Sample& sample, const FunctionalSpec& f, double sigma,
                                        std::uint64_t seed) {
  require(sigma >= 0.0, ErrorKind::InvalidArgument, "noise level must be nonnegative");
  auto gen = make_stream(seed, StreamTag::response_noise);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> y;
  y.reserve(sample.size());
  for (const Curve& x : sample.curves) {
    const double z = normal(gen);
    y.push_back(evaluate(f, x) + sigma * z);
  }
  return y;
}

}  // namespace fderiv
