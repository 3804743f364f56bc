#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace sketchycgm;

TEST(MaxSingVec, Diagonal) {
  MatR a = MatR::Zero(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  const auto t = max_sing_vec(DenseImplicit<double>(a), SpectralConfig{});
  EXPECT_NEAR(t.sigma, 3.0, 1e-10);
  EXPECT_NEAR(std::abs(t.u(0)), 1.0, 1e-10);
  EXPECT_GT(t.u(0), 0.0);
  EXPECT_NEAR(std::abs(t.v(0)), 1.0, 1e-10);
}

TEST(MaxSingVec, MatchesDenseSvd) {
  auto rng = detail::make_rng(1, 0);
  for (auto shape : {std::pair<Index, Index>{40, 30}, {30, 40}, {200, 120}}) {
    const MatR a = detail::random_normal<double>(shape.first, shape.second, rng);
    Eigen::JacobiSVD<MatR> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto t = max_sing_vec(DenseImplicit<double>(a), SpectralConfig{});
    EXPECT_NEAR(t.sigma, svd.singularValues()(0), 1e-8 * svd.singularValues()(0));
    EXPECT_NEAR(std::abs(t.u.dot(svd.matrixU().col(0))), 1.0, 1e-7);
    EXPECT_NEAR(std::abs(t.v.dot(svd.matrixV().col(0))), 1.0, 1e-7);
    EXPECT_LE((a * t.v - t.sigma * t.u).norm(), 1e-6 * t.sigma);
  }
}

TEST(MaxSingVec, ComplexAndHomogeneous) {
  auto rng = detail::make_rng(2, 0);
  const MatC a = detail::random_normal<cplx>(25, 18, rng);
  const auto t1 = max_sing_vec(DenseImplicit<cplx>(a), SpectralConfig{});
  const auto t2 = max_sing_vec(DenseImplicit<cplx>(MatC(cplx(0, 5.0) * a)), SpectralConfig{});
  EXPECT_NEAR(t2.sigma, 5.0 * t1.sigma, 1e-8 * t2.sigma);
  Eigen::JacobiSVD<MatC> svd(a);
  EXPECT_NEAR(t1.sigma, svd.singularValues()(0), 1e-8 * t1.sigma);
}

TEST(MaxSingVec, OperatorGradient) {
  auto rng = detail::make_rng(3, 0);
  std::vector<Entry> entries;
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 9; ++j)
      if ((i + 2 * j) % 3 != 0) entries.push_back(Entry{i, j});
  EntrySampling<double> op(12, 9, entries);
  const VecR g = detail::random_normal_vec<double>(op.measurements(), rng);
  const auto dense = oracle::DenseOperator<double>::from_entries(12, 9, entries);
  Eigen::JacobiSVD<MatR> svd(dense.adjoint(g));
  const auto t = max_sing_vec(ImplicitGradientMatrix<EntrySampling<double>>(op, g), SpectralConfig{});
  EXPECT_NEAR(t.sigma, svd.singularValues()(0), 1e-8 * t.sigma);
}

TEST(MinEig, DiagonalIndefinite) {
  MatR a = MatR::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = -1.0;
  const auto p = min_eig(DenseImplicit<double>(a), SpectralConfig{});
  EXPECT_NEAR(p.lambda, -1.0, 1e-10);
  EXPECT_NEAR(std::abs(p.u(1)), 1.0, 1e-10);
}

TEST(MinEig, RandomHermitian) {
  auto rng = detail::make_rng(4, 0);
  for (Index n : {5, 60, 150}) {
    const MatC b = detail::random_normal<cplx>(n, n, rng);
    const MatC h = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<MatC> eig(h);
    const auto p = min_eig(DenseImplicit<cplx>(h), SpectralConfig{});
    EXPECT_NEAR(p.lambda, eig.eigenvalues()(0), 1e-7 * std::abs(eig.eigenvalues()(0)));
    EXPECT_LE((h * p.u - p.lambda * p.u).norm(), 1e-5 * eig.eigenvalues().cwiseAbs().maxCoeff());
  }
}

TEST(MinEig, PositiveDefiniteReturnsPositive) {
  MatR a = MatR::Identity(4, 4);
  a(2, 2) = 0.25;
  const auto p = min_eig(DenseImplicit<double>(a), SpectralConfig{});
  EXPECT_NEAR(p.lambda, 0.25, 1e-10);
}

TEST(Spectral, RejectsBadConfig) {
  SpectralConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(max_sing_vec(DenseImplicit<double>(MatR::Identity(2, 2)), cfg), InvalidArgument);
}
