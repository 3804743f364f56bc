#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"

using namespace sketchycgm;

TEST(Sketch, Dimensions) {
  const auto d = SketchDims::for_rank(30, 20, 3);
  EXPECT_EQ(d.k, 7);
  EXPECT_EQ(d.l, 15);
  EXPECT_EQ(d.storage_scalars(), 20 * 7 + 15 * 30 + 30 * 7 + 15 * 20);
  EXPECT_THROW(SketchDims::for_rank(3, 3, 0), InvalidArgument);
}

TEST(Sketch, TracksRankOneUpdatesExactly) {
  Sketch<double> sk(15, 11, 2, 4);
  auto rng = detail::make_rng(2, 0);
  MatR x = MatR::Zero(15, 11);
  for (int t = 0; t < 30; ++t) {
    const VecR u = detail::random_normal_vec<double>(15, rng), v = detail::random_normal_vec<double>(11, rng);
    const double eta = 2.0 / (t + 2.0);
    sk.cgm_update(u, v, eta);
    x = (1.0 - eta) * x + eta * u * v.transpose();
  }
  EXPECT_LE((sk.range_sketch() - x * sk.omega()).norm(), 1e-12 * x.norm());
  EXPECT_LE((sk.corange_sketch() - sk.psi() * x).norm(), 1e-12 * x.norm());
}

TEST(Sketch, RecoversLowRankExactly) {
  for (Index r : {1, 2, 4}) {
    auto rng = detail::make_rng(r, 0);
    const MatC a = detail::random_normal<cplx>(25, r, rng), b = detail::random_normal<cplx>(18, r, rng);
    Sketch<cplx> sk(25, 18, r, 10 + r);
    for (Index j = 0; j < r; ++j) sk.linear_update(cplx(1), cplx(1), VecC(a.col(j)), VecC(b.col(j)));
    const MatC x = a * b.adjoint();
    EXPECT_LE((sk.reconstruct(r).dense() - x).norm(), 1e-9 * x.norm());
  }
}

TEST(Sketch, ExplicitUpdateAgreesWithRankOneUpdates) {
  auto rng = detail::make_rng(6, 0);
  const VecR u = detail::random_normal_vec<double>(9, rng), v = detail::random_normal_vec<double>(7, rng);
  Sketch<double> a(9, 7, 1, 1), b(9, 7, 1, 1);
  a.linear_update(0.5, 2.0, u, v);
  b.linear_update(0.5, 2.0, MatR(u * v.transpose()));
  EXPECT_LE((a.range_sketch() - b.range_sketch()).norm(), 1e-13);
  EXPECT_LE((a.corange_sketch() - b.corange_sketch()).norm(), 1e-13);
}

TEST(Sketch, PsdReconstruction) {
  auto rng = detail::make_rng(8, 0);
  const VecC x = detail::random_normal_vec<cplx>(12, rng);
  Sketch<cplx> sk(12, 12, 1, 3);
  sk.linear_update(cplx(0), cplx(1), x, x);
  const auto f = sk.reconstruct_psd(1);
  EXPECT_LE((f.dense() - x * x.adjoint()).norm(), 1e-9 * x.squaredNorm());
  EXPECT_NEAR(f.sigma(0), x.squaredNorm(), 1e-9 * x.squaredNorm());
  EXPECT_LE(oracle::phase_grid_error(f.top_vector(), x, 10000), 1e-3);
}

TEST(Sketch, RejectsBadUpdates) {
  Sketch<double> sk(4, 3, 1, 0);
  EXPECT_THROW(sk.cgm_update(VecR::Ones(4), VecR::Ones(3), 1.5), InvalidArgument);
  EXPECT_THROW(sk.cgm_update(VecR::Ones(3), VecR::Ones(3), 0.5), DimensionMismatch);
  EXPECT_THROW(sk.reconstruct(2), InvalidArgument);
}

TEST(Sketch, DeterministicTestMatrices) {
  Sketch<double> a(5, 4, 1, 77), b(5, 4, 1, 77), c(5, 4, 1, 78);
  EXPECT_EQ(a.omega(), b.omega());
  EXPECT_EQ(a.psi(), b.psi());
  EXPECT_NE(a.omega(), c.omega());
}

TEST(Sketch, FactorFilesRoundTrip) {
  auto rng = detail::make_rng(3, 0);
  FactoredMatrix<cplx> f{detail::random_normal<cplx>(5, 2, rng), VecR(2), detail::random_normal<cplx>(4, 2, rng)};
  f.sigma << 3.0, 1.0;
  const auto dir = std::filesystem::temp_directory_path() / "sketchycgm_factor_roundtrip";
  write_factored(dir, f);
  const auto g = read_factored<cplx>(dir);
  EXPECT_EQ(g.U, f.U);
  EXPECT_EQ(g.sigma, f.sigma);
  EXPECT_EQ(g.V, f.V);
  std::filesystem::remove_all(dir);
}
