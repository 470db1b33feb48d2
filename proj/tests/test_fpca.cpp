#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "fderiv/fpca.hpp"
#include "fderiv/simulate.hpp"
#include "test_helpers.hpp"

using namespace fderiv;

namespace {

Curve line(const GridPtr& g, double slope) {
  return Curve::from_function(g, [slope](double t) { return slope * t; });
}

ProcessSpec two_component_process(const GridPtr& g) {
  return ProcessSpec{g, {1.0, 0.25}, Curve::zero(g), ScoreDistribution::gaussian, "test"};
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(MeanFunction, Examples) {
  const auto g = Grid::uniform(11);
  const Curve f = line(g, 3.0) + Curve::constant(g, 1.0);
  const Curve zero = mean_function(make_sample({f, -1.0 * f}));
  for (double v : zero.values()) EXPECT_NEAR(v, 0.0, 1e-15);

  const Curve single = mean_function(make_sample({f}));
  EXPECT_TRUE(std::equal(single.values().begin(), single.values().end(), f.values().begin()));

  const Curve two_t = mean_function(make_sample({line(g, 1), line(g, 2), line(g, 3)}));
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(two_t[k], 2.0 * g->point(k), 1e-15);

  Sample empty{g, {}, {}};
  EXPECT_FDERIV_ERROR(mean_function(empty), ErrorKind::EmptySample);
  EXPECT_FDERIV_ERROR(make_sample({}), ErrorKind::EmptySample);
}

TEST(EmpiricalCovariance, SymmetricPairGivesOuterProduct) {
  const auto g = Grid::uniform(9);
  const Curve f = Curve::from_function(g, [](double t) { return std::cos(3 * t) + t; });
  const Eigen::MatrixXd cov = empirical_covariance(make_sample({f, -1.0 * f}));
  for (std::size_t k = 0; k < g->size(); ++k)
    for (std::size_t l = 0; l < g->size(); ++l) EXPECT_NEAR(cov(k, l), f[k] * f[l], 1e-14);
}

TEST(EmpiricalCovariance, IdenticalCurvesGiveZero) {
  const auto g = Grid::uniform(9);
  const Curve f = line(g, 2.0);
  EXPECT_EQ(max_abs(empirical_covariance(make_sample({f, f, f}))), 0.0);
  EXPECT_FDERIV_ERROR(empirical_covariance(make_sample({f})), ErrorKind::InsufficientSample);
}

TEST(EmpiricalCovariance, TopEigenvalueOnSimulatedSample) {
  // Monte Carlo reference: sd of the top eigenvalue at n = 500 is about
  // sqrt(2/500) ~ 0.063, so the 20% band is a >3 sd check.
  const auto g = Grid::uniform(101);
  const Sample s = sample_process(two_component_process(g), 500, 17);
  const EigenPairs eig = eigendecompose(empirical_covariance(s), g, 2);
  EXPECT_NEAR(eig.eigenvalues[0], 1.0, 0.2);
  EXPECT_NEAR(eig.eigenvalues[1], 0.25, 0.05);
}

TEST(Eigendecompose, RankOne) {
  const auto g = Grid::make({0.0, 0.05, 0.2, 0.3, 0.45, 0.6, 0.61, 0.8, 0.93, 1.0});
  Curve psi = Curve::from_function(g, [](double t) { return 1.0 + std::sin(5 * t); });
  psi *= 1.0 / l2_norm(psi);
  Eigen::MatrixXd cov(g->size(), g->size());
  for (std::size_t k = 0; k < g->size(); ++k)
    for (std::size_t l = 0; l < g->size(); ++l) cov(k, l) = psi[k] * psi[l];
  const EigenPairs eig = eigendecompose(cov, g, g->size());
  EXPECT_NEAR(eig.eigenvalues[0], 1.0, 1e-8);
  const double align = inner_product(eig.eigenfunctions[0], psi);
  EXPECT_NEAR(std::abs(align), 1.0, 1e-8);
  for (std::size_t j = 1; j < eig.eigenvalues.size(); ++j) EXPECT_LE(eig.eigenvalues[j], 1e-10);
}

TEST(Eigendecompose, ZeroOperator) {
  const auto g = Grid::uniform(7);
  const EigenPairs eig = eigendecompose(Eigen::MatrixXd::Zero(7, 7), g, 7);
  for (double v : eig.eigenvalues) EXPECT_EQ(v, 0.0);
}

TEST(Eigendecompose, RankTwoSynthesisInOrder) {
  const auto g = Grid::uniform(101);
  const auto basis = fourier_basis(g, 3);
  const Curve& p1 = basis[2];
  const Curve& p2 = basis[1];
  Eigen::MatrixXd cov(101, 101);
  for (std::size_t k = 0; k < 101; ++k)
    for (std::size_t l = 0; l < 101; ++l) cov(k, l) = 2.0 * p1[k] * p1[l] + 1.0 * p2[k] * p2[l];
  const EigenPairs eig = eigendecompose(cov, g, 3);
  EXPECT_NEAR(eig.eigenvalues[0], 2.0, 1e-8);
  EXPECT_NEAR(eig.eigenvalues[1], 1.0, 1e-8);
  EXPECT_LE(eig.eigenvalues[2], 1e-10);
  EXPECT_NEAR(std::abs(inner_product(eig.eigenfunctions[0], p1)), 1.0, 1e-8);
  EXPECT_NEAR(std::abs(inner_product(eig.eigenfunctions[1], p2)), 1.0, 1e-8);
}

TEST(Eigendecompose, OperatorEquationHoldsUnderQuadrature) {
  const auto g = Grid::make({0.0, 0.1, 0.15, 0.4, 0.5, 0.55, 0.7, 0.9, 1.0});
  const std::size_t m = g->size();
  Eigen::MatrixXd cov(m, m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) cov(k, l) = std::exp(-std::abs(g->point(k) - g->point(l)));
  const EigenPairs eig = eigendecompose(cov, g, m);
  for (std::size_t j = 0; j < m; ++j) {
    const Curve& psi = eig.eigenfunctions[j];
    for (std::size_t k = 0; k < m; ++k) {
      double applied = 0.0;
      for (std::size_t l = 0; l < m; ++l) applied += cov(k, l) * g->weight(l) * psi[l];
      EXPECT_NEAR(applied, eig.eigenvalues[j] * psi[k], 1e-8);
    }
    if (j > 0) EXPECT_LE(eig.eigenvalues[j], eig.eigenvalues[j - 1]);
  }
}

TEST(Eigendecompose, RejectsAsymmetricInput) {
  const auto g = Grid::uniform(3);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
  cov(0, 1) = 0.5;
  EXPECT_FDERIV_ERROR(eigendecompose(cov, g, 2), ErrorKind::AsymmetricMatrix);
  EXPECT_FDERIV_ERROR(eigendecompose(Eigen::MatrixXd::Identity(3, 3), g, 4), ErrorKind::InvalidArgument);
}

TEST(Eigendecompose, RejectsMateriallyNegativeSpectrum) {
  const auto g = Grid::uniform(3);
  Eigen::MatrixXd cov = -Eigen::MatrixXd::Identity(3, 3);
  EXPECT_FDERIV_ERROR(eigendecompose(cov, g, 3), ErrorKind::NegativeEigenvalue);
}

TEST(SignConvention, PositiveIntegralOrPositivePeak) {
  const auto g = Grid::uniform(101);
  const auto basis = fourier_basis(g, 3);
  Eigen::MatrixXd cov(101, 101);
  for (std::size_t k = 0; k < 101; ++k)
    for (std::size_t l = 0; l < 101; ++l)
      cov(k, l) = 3.0 * basis[0][k] * basis[0][l] + 2.0 * basis[1][k] * basis[1][l];
  const EigenPairs eig = eigendecompose(cov, g, 2);
  // constant eigenfunction: integral positive
  EXPECT_GT(inner_product(eig.eigenfunctions[0], Curve::constant(g, 1.0)), 0.0);
  // sine eigenfunction: integral is zero, so its largest entry is positive
  const auto v = eig.eigenfunctions[1].values();
  const auto peak = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  EXPECT_GT(*peak, 0.0);

  const EigenPairs again = eigendecompose(cov, g, 2);
  for (std::size_t j = 0; j < 2; ++j)
    EXPECT_TRUE(std::equal(again.eigenfunctions[j].values().begin(), again.eigenfunctions[j].values().end(),
                           eig.eigenfunctions[j].values().begin()));
}

TEST(Scores, ProjectionExamples) {
  const auto g = Grid::uniform(101);
  const Sample s = sample_process(two_component_process(g), 60, 3);
  const EigenSystem eig = fit_fpca(s, 3);

  const Curve on_axis = axpy(3.0, eig.eigenfunctions[0], eig.mean);
  const Eigen::MatrixXd row = scores(make_sample({on_axis, eig.mean}), eig.mean, eig.eigenfunctions);
  EXPECT_NEAR(row(0, 0), 3.0, 1e-8);
  EXPECT_NEAR(row(0, 1), 0.0, 1e-8);
  EXPECT_NEAR(row(0, 2), 0.0, 1e-8);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(row(1, j), 0.0, 1e-12);

  for (Eigen::Index j = 0; j < eig.scores.cols(); ++j) EXPECT_NEAR(eig.scores.col(j).mean(), 0.0, 1e-10);

  const Sample other = make_sample({Curve::zero(Grid::uniform(50))});
  EXPECT_FDERIV_ERROR(scores(other, eig.mean, eig.eigenfunctions), ErrorKind::GridMismatch);
}

TEST(SelectComponents, Examples) {
  const std::vector<double> growth{78.9, 17.0, 3.6, 0.4, 0.1};
  EXPECT_EQ(select_components(growth, 0.995), 3u);
  EXPECT_EQ(select_components(growth, 1e-9), 1u);
  EXPECT_EQ(select_components(std::vector<double>{1, 1, 1, 1}, 1.0), 4u);
  EXPECT_FDERIV_ERROR(select_components(std::vector<double>{0, 0}, 0.5), ErrorKind::DegenerateSpectrum);
  EXPECT_FDERIV_ERROR(select_components(growth, 0.0), ErrorKind::InvalidArgument);
}

TEST(FitFpca, ExactnessProperties) {
  const auto g = Grid::uniform(51);
  const ProcessSpec spec = preset_process("expdecay-b1-beta1", g, 9);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Sample s = sample_process(spec, 40, seed);
    const EigenSystem eig = fit_fpca(s, g->size());
    const std::size_t k = eig.components();
    const double n = static_cast<double>(s.size());

    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b)
        EXPECT_NEAR(inner_product(eig.eigenfunctions[a], eig.eigenfunctions[b]), a == b ? 1.0 : 0.0, 1e-8);

    const Eigen::MatrixXd score_cov = eig.scores.transpose() * eig.scores / n;
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t j = 0; j < k; ++j) diag(j, j) = eig.eigenvalues[j];
    EXPECT_LE(max_abs(score_cov - diag), 1e-8 * eig.eigenvalues[0]);

    const Eigen::MatrixXd cov = empirical_covariance(s);
    Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(g->size(), g->size());
    for (std::size_t j = 0; j < k; ++j) {
      const auto v = eig.eigenfunctions[j].values();
      const Eigen::Map<const Eigen::VectorXd> psi(v.data(), static_cast<Eigen::Index>(v.size()));
      recon += eig.eigenvalues[j] * psi * psi.transpose();
    }
    EXPECT_LE(max_abs(recon - cov), 1e-6);

    // eigenvalues vanish beyond rank n - 1 of the centered data
    for (std::size_t j = s.size(); j < k; ++j) EXPECT_LE(eig.eigenvalues[j], 1e-10 * eig.eigenvalues[0]);
    EXPECT_NEAR(eig.fve.back(), 1.0, 1e-12);
  }
}

TEST(FitFpca, TruncateAndFlip) {
  const auto g = Grid::uniform(31);
  const Sample s = sample_process(preset_process("expdecay-b1-beta1", g, 5), 30, 9);
  const EigenSystem eig = fit_fpca(s, 10);
  const EigenSystem t = truncate(eig, 3);
  EXPECT_EQ(t.components(), 3u);
  EXPECT_EQ(t.scores.cols(), 3);
  const EigenSystem f = flip_component(t, 1);
  EXPECT_EQ(f.eigenfunctions[1][4], -t.eigenfunctions[1][4]);
  EXPECT_EQ(f.scores(7, 1), -t.scores(7, 1));
  EXPECT_FDERIV_ERROR(truncate(eig, 11), ErrorKind::InvalidArgument);
}

TEST(FitFpca, EigenfunctionErrorShrinksWithSampleSize) {
  // root-n consistency of psi_hat, checked as a trend over 20 replicates
  const auto g = Grid::uniform(101);
  const ProcessSpec spec{g, {1.0, 0.4, 0.1}, Curve::zero(g), ScoreDistribution::gaussian, "trend"};
  const auto truth = spec.basis();
  std::vector<double> mean_err;
  for (std::size_t n : {100u, 400u, 1600u}) {
    double acc = 0.0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      const EigenSystem eig = fit_fpca(sample_process(spec, n, 1000 + rep), 2);
      for (std::size_t j = 0; j < 2; ++j) {
        const double sign = inner_product(eig.eigenfunctions[j], truth[j]) >= 0.0 ? 1.0 : -1.0;
        acc += l2_norm(sign * eig.eigenfunctions[j] - truth[j]);
      }
    }
    mean_err.push_back(acc / 40.0);
  }
  EXPECT_LT(mean_err[1], mean_err[0]);
  EXPECT_LT(mean_err[2], mean_err[1]);
}
