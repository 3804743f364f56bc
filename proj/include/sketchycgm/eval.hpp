#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sketchycgm/losses.hpp"
#include "sketchycgm/operators.hpp"
#include "sketchycgm/sketch.hpp"
#include "sketchycgm/types.hpp"

namespace sketchycgm {

/// Number of singular values strictly above eps * sigma_1. `values` must be
/// sorted descending and nonnegative.
inline int eps_rank(const VecR& values, double eps) {
  detail::require(eps > 0.0 && eps < 1.0, "eps_rank: eps must lie in (0, 1)");
  if (values.size() == 0 || values(0) <= 0.0) return 0;
  const double cut = eps * values(0);
  int count = 0;
  for (Index i = 0; i < values.size(); ++i) {
    detail::require(values(i) >= 0.0 && (i == 0 || values(i) <= values(i - 1)),
                    "eps_rank: values must be nonnegative and nonincreasing");
    if (values(i) > cut) ++count;
  }
  return count;
}

/// min over phi of ||e^{i phi} xhat - x|| / ||x||, in closed form.
template <Field S>
double phase_aligned_error(const Vec<S>& xhat, const Vec<S>& x) {
  detail::require_dims(xhat.size() == x.size(), "phase_aligned_error: length mismatch");
  const double nx = x.norm();
  if (nx == 0.0) throw ZeroTruth("phase_aligned_error: truth vector is zero");
  const double cross = std::abs(xhat.dot(x));
  const double sq = std::max(0.0, xhat.squaredNorm() + x.squaredNorm() - 2.0 * cross);
  return std::sqrt(sq) / nx;
}

/// 20 log10(peak / rmse); +inf when the arrays match exactly.
template <class DA, class DB>
double psnr(const Eigen::MatrixBase<DA>& xhat, const Eigen::MatrixBase<DB>& x, double peak) {
  detail::require_dims(xhat.rows() == x.rows() && xhat.cols() == x.cols(), "psnr: shape mismatch");
  detail::require(peak > 0.0, "psnr: peak must be positive");
  const double mse = (xhat - x).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

/// Held-out entries E' with values b' and the loss used to score them.
struct EvalSpec {
  std::vector<Entry> entries;
  VecR values;
  LossKind kind = LossKind::gauss;
  double huber_delta = 1.0;
};

/// (1/|E'|) sum psi(Xhat_ij, b'_ij), read entrywise from the factors.
inline double test_error(const FactoredMatrix<double>& xhat, const EvalSpec& eval) {
  detail::require_dims(static_cast<Index>(eval.entries.size()) == eval.values.size(),
                       "test_error: one value per test entry");
  detail::require(!eval.entries.empty(), "test_error: empty test set");
  const Loss scorer(eval.kind, eval.values, 1.0, eval.huber_delta);
  double acc = 0.0;
  for (std::size_t k = 0; k < eval.entries.size(); ++k) {
    const auto& e = eval.entries[k];
    if (e.row < 0 || e.row >= xhat.rows() || e.col < 0 || e.col >= xhat.cols())
      throw DimensionMismatch("test_error: entry outside the factored matrix");
    acc += scorer.psi(xhat.entry(e.row, e.col), eval.values(static_cast<Index>(k)));
  }
  return acc / static_cast<double>(eval.entries.size());
}

}  // namespace sketchycgm
