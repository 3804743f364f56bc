#pragma once

// Extreme singular/eigen pairs of matrices seen only through matvecs.
//
// max_sing_vec: Golub-Kahan-Lanczos bidiagonalization with full
//   reorthogonalization and explicit restarts from the current Ritz vector.
// min_eig: Hermitian Lanczos, same restart scheme, bottom Ritz pair.
//
// Both stop on the Ritz residual bound, which for the GKL recurrence is
// |beta_j * p_j| and for Lanczos is |beta_j * s_j|.

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "sketchycgm/ledger.hpp"
#include "sketchycgm/operators.hpp"
#include "sketchycgm/types.hpp"

namespace sketchycgm {

struct SpectralConfig {
  double tol = 1e-8;        // relative Ritz residual
  int max_iters = 500;      // total matvec pairs across restarts
  Index krylov_dim = 32;    // basis vectors kept before a restart
  std::uint64_t seed = 0;   // start vector
};

template <class G>
concept ImplicitMatrix = Field<typename G::Scalar> &&
    requires(const G& g, const Vec<typename G::Scalar>& x) {
      { g.rows() } -> std::convertible_to<Index>;
      { g.cols() } -> std::convertible_to<Index>;
      { g.apply(x) } -> std::same_as<Vec<typename G::Scalar>>;
      { g.apply_adjoint(x) } -> std::same_as<Vec<typename G::Scalar>>;
    };

/// A^*(g) for a measurement operator, applied through the black-box
/// primitives only.
template <MeasurementOperator Op>
class ImplicitGradientMatrix {
 public:
  using Scalar = typename Op::Scalar;

  ImplicitGradientMatrix(const Op& op, const VecR& g)
      : op_(&op), g_(g.template cast<Scalar>()), lease_(LedgerModule::spectral, g.size()) {
    detail::require_dims(g.size() == op.measurements(), "gradient length must equal d");
    if (!g.allFinite()) throw NonFiniteInput("gradient has non-finite entries");
  }

  Index rows() const { return op_->rows(); }
  Index cols() const { return op_->cols(); }
  bool is_zero() const { return g_.squaredNorm() == 0.0; }

  Vec<Scalar> apply(const Vec<Scalar>& v) const { return op_->right_apply_adjoint(g_, v); }
  Vec<Scalar> apply_adjoint(const Vec<Scalar>& u) const { return op_->left_apply_adjoint(g_, u); }

 private:
  const Op* op_;
  Vec<Scalar> g_;
  ScalarLease lease_;
};

/// Adapter for an explicit matrix.
template <Field S>
class DenseImplicit {
 public:
  using Scalar = S;
  explicit DenseImplicit(Mat<S> a) : a_(std::move(a)) {}
  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }
  Vec<S> apply(const Vec<S>& v) const { return a_ * v; }
  Vec<S> apply_adjoint(const Vec<S>& u) const { return a_.adjoint() * u; }

 private:
  Mat<S> a_;
};

template <Field S>
struct SingularTriple {
  Vec<S> u;
  Vec<S> v;
  double sigma = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

template <Field S>
struct EigenPair {
  double lambda = 0.0;
  Vec<S> u;
  double norm_estimate = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

/// Two passes of classical Gram-Schmidt against the first `count` columns.
template <Field S>
void reorthogonalize(Vec<S>& x, const Mat<S>& basis, Index count) {
  if (count == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vec<S> coeffs = basis.leftCols(count).adjoint() * x;
    x.noalias() -= basis.leftCols(count) * coeffs;
  }
}

template <Field S>
Vec<S> random_unit(Index n, std::mt19937_64& rng) {
  Vec<S> x = random_normal_vec<S>(n, rng);
  return x / x.norm();
}

/// Fresh unit vector orthogonal to the first `count` basis columns.
template <Field S>
Vec<S> random_orthogonal_unit(const Mat<S>& basis, Index count, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    Vec<S> x = random_normal_vec<S>(basis.rows(), rng);
    reorthogonalize(x, basis, count);
    const double nrm = x.norm();
    if (nrm > 1e-8) return x / nrm;
  }
  throw NoConvergence("could not extend Krylov basis", 0);
}

}  // namespace detail

namespace detail {

template <ImplicitMatrix G>
class AdjointView {
 public:
  using Scalar = typename G::Scalar;
  explicit AdjointView(const G& g) : g_(&g) {}
  Index rows() const { return g_->cols(); }
  Index cols() const { return g_->rows(); }
  Vec<Scalar> apply(const Vec<Scalar>& x) const { return g_->apply_adjoint(x); }
  Vec<Scalar> apply_adjoint(const Vec<Scalar>& x) const { return g_->apply(x); }

 private:
  const G* g_;
};

// Requires rows() >= cols(), so that k == cols() steps span the whole right space.
template <ImplicitMatrix G>
SingularTriple<typename G::Scalar> max_sing_vec_tall(const G& op, const SpectralConfig& cfg) {
  using S = typename G::Scalar;
  const Index m = op.rows();
  const Index n = op.cols();
  const Index kmax = std::min<Index>(cfg.krylov_dim, std::min(m, n));
  ScalarLease lease(LedgerModule::spectral, (m + n) * (kmax + 1) + 2 * kmax);
  // When the whole right space fits in one basis, always run to exhaustion:
  // the result is then exact up to rounding and depends continuously on the
  // input instead of on where a tolerance test happened to trip.
  const bool full_space = n <= cfg.krylov_dim;

  auto rng = detail::make_rng(cfg.seed, 0x5161u);
  Mat<S> us(m, kmax);
  Mat<S> vs(n, kmax + 1);
  VecR alpha(kmax), beta(kmax);
  Vec<S> start = detail::random_unit<S>(n, rng);
  double norm_est = 0.0;
  int steps = 0;

  while (true) {
    vs.col(0) = start;
    for (Index j = 0; j < kmax; ++j) {
      Vec<S> u = op.apply(Vec<S>(vs.col(j)));
      if (j > 0) u -= beta(j - 1) * us.col(j - 1);
      detail::reorthogonalize(u, us, j);
      alpha(j) = u.norm();
      if (j == 0 && alpha(0) <= std::numeric_limits<double>::min()) {
        // G v = 0 for a random v: G is zero.
        SingularTriple<S> out;
        out.v = vs.col(0);
        out.u = detail::random_unit<S>(m, rng);
        const S c = detail::canonical_phase(out.u);
        out.u *= c;
        out.v *= c;
        out.iterations = steps + 1;
        return out;
      }
      if (alpha(j) <= 1e-13 * norm_est) {
        alpha(j) = 0.0;
        us.col(j) = detail::random_orthogonal_unit<S>(us, j, rng);
      } else {
        us.col(j) = u / alpha(j);
      }
      Vec<S> v = op.apply_adjoint(Vec<S>(us.col(j))) - alpha(j) * vs.col(j);
      detail::reorthogonalize(v, vs, j + 1);
      beta(j) = v.norm();
      ++steps;
      norm_est = std::max({norm_est, alpha(j), beta(j)});

      const Index k = j + 1;
      MatR b = MatR::Zero(k, k);
      for (Index i = 0; i < k; ++i) {
        b(i, i) = alpha(i);
        if (i + 1 < k) b(i, i + 1) = beta(i);
      }
      Eigen::JacobiSVD<MatR> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double theta = svd.singularValues()(0);
      const double residual = std::abs(beta(j) * svd.matrixU()(j, 0));
      const bool exhausted = k == n;
      if ((!full_space && residual <= cfg.tol * theta) || exhausted || beta(j) <= 1e-14 * norm_est) {
        SingularTriple<S> out;
        out.u = us.leftCols(k) * svd.matrixU().col(0).template cast<S>();
        out.v = vs.leftCols(k) * svd.matrixV().col(0).template cast<S>();
        out.u.normalize();
        out.v.normalize();
        const S c = detail::canonical_phase(out.u);
        out.u *= c;
        out.v *= c;
        out.sigma = theta;
        out.residual = residual;
        out.iterations = steps;
        return out;
      }
      if (steps >= cfg.max_iters)
        throw NoConvergence("max_sing_vec: residual " + std::to_string(residual) + " after " +
                                std::to_string(steps) + " steps",
                            steps);
      if (k == kmax) {
        start = vs.leftCols(k) * svd.matrixV().col(0).template cast<S>();
        start.normalize();
        break;
      }
      vs.col(j + 1) = v / beta(j);
    }
  }
}

}  // namespace detail

/// Top singular triple (u, v, sigma) with the largest-magnitude entry of u
/// real positive.
template <ImplicitMatrix G>
SingularTriple<typename G::Scalar> max_sing_vec(const G& op, const SpectralConfig& cfg) {
  detail::require(cfg.tol > 0.0 && cfg.max_iters >= 1 && cfg.krylov_dim >= 1,
                  "max_sing_vec: invalid configuration");
  if (op.rows() >= op.cols()) return detail::max_sing_vec_tall(op, cfg);
  auto t = detail::max_sing_vec_tall(detail::AdjointView<G>(op), cfg);
  std::swap(t.u, t.v);
  const auto c = detail::canonical_phase(t.u);
  t.u *= c;
  t.v *= c;
  return t;
}

/// Bottom eigenpair of a Hermitian implicit matrix (apply is used; the
/// adjoint is assumed equal).
template <ImplicitMatrix G>
EigenPair<typename G::Scalar> min_eig(const G& op, const SpectralConfig& cfg) {
  using S = typename G::Scalar;
  detail::require(cfg.tol > 0.0 && cfg.max_iters >= 1 && cfg.krylov_dim >= 1,
                  "min_eig: invalid configuration");
  detail::require_dims(op.rows() == op.cols(), "min_eig: matrix must be square");
  const Index n = op.rows();
  const Index kmax = std::min<Index>(cfg.krylov_dim, n);
  ScalarLease lease(LedgerModule::spectral, n * (kmax + 1) + 2 * kmax);
  const bool full_space = n <= cfg.krylov_dim;  // see max_sing_vec_tall

  auto rng = detail::make_rng(cfg.seed, 0xE16u);
  Mat<S> qs(n, kmax);
  VecR alpha(kmax), beta(kmax);
  Vec<S> start = detail::random_unit<S>(n, rng);
  double norm_est = 0.0;
  int steps = 0;

  while (true) {
    qs.col(0) = start;
    for (Index j = 0; j < kmax; ++j) {
      Vec<S> w = op.apply(Vec<S>(qs.col(j)));
      alpha(j) = real_of(qs.col(j).dot(w));
      w -= alpha(j) * qs.col(j);
      if (j > 0) w -= beta(j - 1) * qs.col(j - 1);
      detail::reorthogonalize(w, qs, j + 1);
      beta(j) = w.norm();
      ++steps;

      const Index k = j + 1;
      MatR t = MatR::Zero(k, k);
      for (Index i = 0; i < k; ++i) {
        t(i, i) = alpha(i);
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta(i);
      }
      Eigen::SelfAdjointEigenSolver<MatR> eig(t);
      const double theta = eig.eigenvalues()(0);
      norm_est = std::max({norm_est, std::abs(eig.eigenvalues()(0)),
                           std::abs(eig.eigenvalues()(k - 1))});
      const double residual = std::abs(beta(j) * eig.eigenvectors()(j, 0));
      const bool exhausted = k == n;
      if ((!full_space && residual <= cfg.tol * norm_est) || exhausted || beta(j) <= 1e-14 * norm_est) {
        EigenPair<S> out;
        out.lambda = theta;
        out.u = qs.leftCols(k) * eig.eigenvectors().col(0).template cast<S>();
        out.u.normalize();
        out.u *= detail::canonical_phase(out.u);
        out.norm_estimate = norm_est;
        out.residual = residual;
        out.iterations = steps;
        return out;
      }
      if (steps >= cfg.max_iters)
        throw NoConvergence("min_eig: residual " + std::to_string(residual) + " after " +
                                std::to_string(steps) + " steps",
                            steps);
      if (k == kmax) {
        start = qs.leftCols(k) * eig.eigenvectors().col(0).template cast<S>();
        start.normalize();
        break;
      }
      qs.col(j + 1) = w / beta(j);
    }
  }
}

}  // namespace sketchycgm
