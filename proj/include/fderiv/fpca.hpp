#pragma once

// Mean function, empirical covariance surface and its L2 eigendecomposition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fderiv/error.hpp"
#include "fderiv/function_space.hpp"

namespace fderiv {

/// n curves on one shared grid. The optional time metadata maps the [0,1]
/// grid back to the observed time axis: t_observed = time_origin + time_scale * t.
struct Sample {
  GridPtr grid;
  std::vector<Curve> curves;
  std::vector<std::string> ids;
  double time_origin = 0.0;
  double time_scale = 1.0;

  std::size_t size() const noexcept { return curves.size(); }
  const Curve& operator[](std::size_t i) const { return curves[i]; }
};

/// Builds a sample, checks the shared grid and fills default ids ("1", "2", ...).
inline Sample make_sample(std::vector<Curve> curves, std::vector<std::string> ids = {}) {
  require(!curves.empty(), ErrorKind::EmptySample, "sample has no curves");
  GridPtr grid = curves.front().grid();
  for (const Curve& c : curves)
    require(same_grid(grid, c.grid()), ErrorKind::GridMismatch, "sample curves must share one grid");
  if (ids.empty()) {
    ids.reserve(curves.size());
    for (std::size_t i = 0; i < curves.size(); ++i) ids.push_back(std::to_string(i + 1));
  }
  require(ids.size() == curves.size(), ErrorKind::InvalidArgument, "ids and curves differ in length");
  return Sample{std::move(grid), std::move(curves), std::move(ids)};
}

/// Values of the sample as an n x m matrix (row i = curve i).
inline Eigen::MatrixXd data_matrix(const Sample& sample) {
  const std::size_t n = sample.size();
  const std::size_t m = sample.grid->size();
  Eigen::MatrixXd x(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = sample.curves[i].values();
    for (std::size_t k = 0; k < m; ++k) x(i, k) = v[k];
  }
  return x;
}

inline Curve mean_function(const Sample& sample) {
  require(sample.size() >= 1, ErrorKind::EmptySample, "mean of an empty sample");
  const std::size_t m = sample.grid->size();
  std::vector<double> acc(m, 0.0);
  for (const Curve& c : sample.curves) {
    const auto v = c.values();
    for (std::size_t k = 0; k < m; ++k) acc[k] += v[k];
  }
  const double inv = 1.0 / static_cast<double>(sample.size());
  for (double& a : acc) a *= inv;
  return Curve(sample.grid, std::move(acc));
}

/// Pointwise covariance on the grid with divisor n.
inline Eigen::MatrixXd empirical_covariance(const Sample& sample) {
  require(sample.size() >= 2, ErrorKind::InsufficientSample, "covariance needs at least 2 curves");
  const Curve mean = mean_function(sample);
  Eigen::MatrixXd centered = data_matrix(sample);
  const Eigen::Map<const Eigen::RowVectorXd> mu(mean.values().data(), static_cast<Eigen::Index>(mean.size()));
  centered.rowwise() -= mu;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(sample.size());
  // the product is symmetric in exact arithmetic; enforce it bitwise
  cov = 0.5 * (cov + cov.transpose()).eval();
  return cov;
}

/// Fixes the sign of an eigenfunction: positive integral, or, when the integral
/// is numerically zero, a positive entry of largest magnitude.
inline void apply_sign_convention(std::vector<double>& values, std::span<const double> weights) {
  double integral = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) integral += weights[k] * values[k];
  bool flip = false;
  if (std::abs(integral) > 1e-10) {
    flip = integral < 0.0;
  } else {
    std::size_t arg = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
      if (std::abs(values[k]) > std::abs(values[arg])) arg = k;
    flip = values[arg] < 0.0;
  }
  if (flip)
    for (double& v : values) v = -v;
}

struct EigenPairs {
  std::vector<double> eigenvalues;   // descending
  std::vector<Curve> eigenfunctions; // L2-orthonormal
};

/// Eigenpairs of the integral operator with kernel `cov` under the grid
/// quadrature. Solved as the symmetric problem W^1/2 cov W^1/2 and mapped back
/// by W^-1/2, so eigenfunctions are orthonormal under inner_product.
inline EigenPairs eigendecompose(const Eigen::MatrixXd& cov, const GridPtr& grid, std::size_t max_components) {
  const auto m = static_cast<Eigen::Index>(grid->size());
  require(cov.rows() == m && cov.cols() == m, ErrorKind::InvalidArgument, "covariance shape does not match grid");
  require(max_components <= grid->size(), ErrorKind::InvalidArgument, "more components requested than grid points");

  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index l = k + 1; l < m; ++l)
      require(std::abs(cov(k, l) - cov(l, k)) <= 1e-10 * scale, ErrorKind::AsymmetricMatrix,
              "covariance is not symmetric");

  const auto w = grid->weights();
  Eigen::VectorXd sqrt_w(m);
  for (Eigen::Index k = 0; k < m; ++k) sqrt_w(k) = std::sqrt(w[static_cast<std::size_t>(k)]);

  Eigen::MatrixXd a = sqrt_w.asDiagonal() * cov * sqrt_w.asDiagonal();
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  require(solver.info() == Eigen::Success, ErrorKind::InvalidArgument, "eigensolver did not converge");

  // Eigen returns ascending order
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const double top = std::max(0.0, values(m - 1));

  EigenPairs out;
  out.eigenvalues.reserve(max_components);
  out.eigenfunctions.reserve(max_components);
  for (std::size_t j = 0; j < max_components; ++j) {
    const Eigen::Index col = m - 1 - static_cast<Eigen::Index>(j);
    double theta = values(col);
    if (theta < 0.0) {
      require(theta > -1e-10 * std::max(1.0, top), ErrorKind::NegativeEigenvalue,
              "covariance has a materially negative eigenvalue");
      theta = 0.0;
    }
    std::vector<double> psi(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) psi[static_cast<std::size_t>(k)] = vectors(k, col) / sqrt_w(k);
    apply_sign_convention(psi, w);
    out.eigenvalues.push_back(theta);
    out.eigenfunctions.emplace_back(grid, std::move(psi));
  }
  return out;
}

/// n x K matrix of scores <X_i - mean, psi_j>.
inline Eigen::MatrixXd scores(const Sample& sample, const Curve& mean, std::span<const Curve> eigenfunctions) {
  const std::size_t n = sample.size();
  Eigen::MatrixXd out(n, eigenfunctions.size());
  for (const Curve& psi : eigenfunctions) require_same_grid(mean, psi);
  for (std::size_t i = 0; i < n; ++i) {
    require_same_grid(sample.curves[i], mean);
    const Curve centered = sample.curves[i] - mean;
    for (std::size_t j = 0; j < eigenfunctions.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inner_product(centered, eigenfunctions[j]);
  }
  return out;
}

/// Smallest K whose cumulative eigenvalue share reaches the threshold.
inline std::size_t select_components(std::span<const double> eigenvalues, double fve_threshold) {
  require(fve_threshold > 0.0 && fve_threshold <= 1.0, ErrorKind::InvalidArgument, "FVE threshold must be in (0,1]");
  const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  require(total > 0.0, ErrorKind::DegenerateSpectrum, "all eigenvalues are zero");
  double running = 0.0;
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    running += eigenvalues[j];
    // relative slack absorbs rounding in the running sum
    if (running / total >= fve_threshold - 1e-12 || j + 1 == eigenvalues.size()) return j + 1;
  }
  return eigenvalues.size();
}

struct EigenSystem {
  Curve mean;
  std::vector<double> eigenvalues;
  std::vector<Curve> eigenfunctions;
  Eigen::MatrixXd scores;   // n x K
  std::vector<double> fve;  // cumulative share of total_variance
  double total_variance = 0.0;

  std::size_t components() const noexcept { return eigenvalues.size(); }
};

/// Full estimate: mean, up to max_components eigenpairs, scores and FVE.
/// FVE is relative to the trace of the whole operator, not just the kept part.
inline EigenSystem fit_fpca(const Sample& sample, std::size_t max_components) {
  const Eigen::MatrixXd cov = empirical_covariance(sample);
  const std::size_t m = sample.grid->size();
  EigenPairs all = eigendecompose(cov, sample.grid, m);
  const double total = std::accumulate(all.eigenvalues.begin(), all.eigenvalues.end(), 0.0);

  const std::size_t k = std::min(max_components, m);
  all.eigenvalues.resize(k);
  all.eigenfunctions.erase(all.eigenfunctions.begin() + static_cast<std::ptrdiff_t>(k), all.eigenfunctions.end());

  Curve mean = mean_function(sample);
  Eigen::MatrixXd sc = scores(sample, mean, all.eigenfunctions);
  std::vector<double> fve(k);
  double running = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    running += all.eigenvalues[j];
    fve[j] = total > 0.0 ? std::min(1.0, running / total) : 0.0;
  }
  return EigenSystem{std::move(mean), std::move(all.eigenvalues), std::move(all.eigenfunctions),
                     std::move(sc), std::move(fve), total};
}

/// Keeps the leading k components.
inline EigenSystem truncate(EigenSystem eig, std::size_t k) {
  require(k <= eig.components(), ErrorKind::InvalidArgument, "cannot truncate to more components than present");
  eig.eigenvalues.resize(k);
  eig.eigenfunctions.erase(eig.eigenfunctions.begin() + static_cast<std::ptrdiff_t>(k), eig.eigenfunctions.end());
  eig.scores = eig.scores.leftCols(static_cast<Eigen::Index>(k)).eval();
  eig.fve.resize(k);
  return eig;
}

/// Same system with component j's sign reversed (eigenfunction and score column).
inline EigenSystem flip_component(EigenSystem eig, std::size_t j) {
  require(j < eig.components(), ErrorKind::InvalidArgument, "component index out of range");
  eig.eigenfunctions[j] *= -1.0;
  eig.scores.col(static_cast<Eigen::Index>(j)) *= -1.0;
  return eig;
}

}  // namespace fderiv
