#pragma once

// Fixed small problems shared by the unit tests and the acceptance binary.

#include "oracles.hpp"

namespace instances {

using namespace sketchycgm;

inline constexpr int kGapInstances = 10;

/// Small completion problems for the gap / rate checks. Losses cycle
/// gauss, huber, logistic; alpha alternates between an active constraint
/// (half the truth's nuclear norm) and an inactive one (1.5x).
inline CompletionProblem gap_instance(int i, int max_iters) {
  SyntheticCompletionSpec cs;
  cs.m = 8 + i % 3;
  cs.n = 6 + i % 2;
  cs.true_rank = 2;
  cs.observed = 0.6;
  cs.train_split = 1.0;
  cs.noise_std = 0.1;
  cs.seed = 100 + static_cast<std::uint64_t>(i);
  cs.rank = 2;
  cs.eps = 1e-14;
  cs.max_iters = max_iters;
  const LossKind kinds[3] = {LossKind::gauss, LossKind::huber, LossKind::logistic};
  cs.loss = kinds[i % 3];
  CompletionProblem cp = gen_completion_problem(cs);
  cp.spec.alpha = (i % 2 == 0 ? 0.5 : 1.5) * cp.truth.sigma.sum();
  return cp;
}

/// Curvature bound of psi used for the oracle's step size.
inline double loss_lipschitz(const Loss& loss) {
  return (loss.kind() == LossKind::logistic ? 0.25 : 1.0) * loss.scale();
}

inline oracle::Optimum solve_oracle(const ProblemSpec<EntrySampling<double>>& spec) {
  const auto dop = oracle::DenseOperator<double>::from_entries(spec.op.rows(), spec.op.cols(), spec.op.entries());
  return oracle::projected_gradient<double>(dop, spec.loss, spec.alpha, Template::schatten1,
                                            loss_lipschitz(spec.loss), 200000, 1e-14);
}

/// Fully observed 12 x 10 noisy rank-2 matrix, alpha = 0.8 ||X||_S1. The
/// loss is strongly convex in X, so the constrained optimum is unique; the
/// active constraint soft-thresholds the spectrum and keeps rank 2.
inline CompletionProblem rank2_instance(int max_iters) {
  SyntheticCompletionSpec cs;
  cs.m = 12;
  cs.n = 10;
  cs.true_rank = 2;
  cs.observed = 1.0;
  cs.train_split = 1.0;
  cs.noise_std = 0.1;
  cs.seed = 0;
  cs.rank = 2;
  cs.eps = 1e-15;
  cs.max_iters = max_iters;
  CompletionProblem cp = gen_completion_problem(cs);
  cp.spec.alpha = 0.8 * cp.truth.sigma.sum();
  return cp;
}

/// 30 x 20 gauss completion instance for the loop-invariant harness.
inline CompletionProblem invariant_instance(int max_iters) {
  SyntheticCompletionSpec cs;
  cs.m = 30;
  cs.n = 20;
  cs.true_rank = 2;
  cs.observed = 0.5;
  cs.train_split = 1.0;
  cs.noise_std = 0.1;
  cs.seed = 3;
  cs.rank = 2;
  cs.eps = 1e-15;
  cs.max_iters = max_iters;
  return gen_completion_problem(cs);
}

}  // namespace instances
