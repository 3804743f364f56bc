#pragma once

// Dense-matrix CGM. Keeps X_t explicitly and recomputes z_t = A X_t from it
// every iteration, sharing the linear-minimization step (and its seeds) with
// SketchyCGM. Intended as a desk-scale oracle; refuses m n > 1e6.

#include <Eigen/SVD>

#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <vector>

#include "sketchycgm/solver.hpp"

namespace sketchycgm {

inline constexpr double kDenseLimit = 1e6;

template <Field S>
struct DenseStepEvent {
  int t;
  double eta;
  const Mat<S>& x;  // after the update
  const VecR& z;    // A X before the update
};

template <Field S>
struct DenseOptions {
  bool record_spectra = false;
  Index spectrum_size = 0;  // 0 keeps every singular value
  std::function<void(const DenseStepEvent<S>&)> observer;
};

template <Field S>
struct DenseResult {
  Mat<S> x;
  std::vector<IterationRecord> trace;
  std::vector<VecR> spectra;  // singular values of X_t, t = 0, 1, ... (when requested)
  bool converged = false;
  int iterations = 0;
};

template <MeasurementOperator Op>
DenseResult<typename Op::Scalar> cgm_dense_solve(const ProblemSpec<Op>& spec, int max_iters,
                                                 const DenseOptions<typename Op::Scalar>& opts = {}) {
  using S = typename Op::Scalar;
  spec.validate();
  const Index m = spec.op.rows();
  const Index n = spec.op.cols();
  const Index d = spec.op.measurements();
  if (static_cast<double>(m) * static_cast<double>(n) > kDenseLimit)
    throw TooLargeForDense("cgm_dense_solve: " + std::to_string(m) + "x" + std::to_string(n) +
                           " exceeds the dense limit");
  ScalarLease lease(LedgerModule::reference, m * n + 3 * d);

  const auto start = std::chrono::steady_clock::now();
  DenseResult<S> out;
  out.x = Mat<S>::Zero(m, n);
  // Poisson variant starts the dual at d^{-1/2} 1 rather than A 0; carry that
  // offset with its decaying weight.
  const VecR z0 = VecR::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double offset = spec.variant == Variant::poisson ? 1.0 : 0.0;

  for (int t = 0; t < max_iters; ++t) {
    VecR z = dense_measure(spec.op, out.x).real() + offset * z0;
    if (opts.record_spectra) {
      Eigen::JacobiSVD<Mat<S>> svd(out.x);
      VecR sv = svd.singularValues();
      if (opts.spectrum_size > 0 && sv.size() > opts.spectrum_size) sv.conservativeResize(opts.spectrum_size);
      out.spectra.push_back(std::move(sv));
    }
    const VecR grad = spec.loss.gradient(z);
    IterationRecord rec;
    rec.t = t;
    rec.objective = spec.loss.value(z);
    rec.eta = learning_rate(t, spec.variant);

    SpectralConfig cfg = spec.spectral;
    cfg.seed = spectral_seed(spec.seed, t);
    std::optional<DirectionResult<S>> dir;
    try {
      dir = compute_direction(spec.op, grad, spec.tmpl, spec.alpha, cfg);
      rec.gap = duality_gap(z, dir->h, grad);
    } catch (const ZeroGradient&) {
      rec.gap = 0.0;
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.trace.push_back(rec);
    if (!dir || rec.gap <= spec.eps) {
      out.converged = true;
      break;
    }
    const double eta = rec.eta;
    // Same operation order as the dual update z <- (1 - eta) z + eta h, so
    // that z_t and A X_t agree to the last bit for entrywise operators.
    if (dir->direction.zero) {
      out.x *= (1.0 - eta);
    } else {
      const Mat<S> h = dir->direction.left * dir->direction.right.adjoint();
      out.x = (1.0 - eta) * out.x + eta * h;
    }
    offset *= (1.0 - eta);
    out.iterations = t + 1;
    if (opts.observer) opts.observer(DenseStepEvent<S>{t, eta, out.x, z});
  }
  return out;
}

/// Spectrum dump: one row per iteration, "iteration,s1,s2,...".
inline void write_spectra_csv(const std::filesystem::path& path, const std::vector<VecR>& spectra) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  Index width = 0;
  for (const auto& s : spectra) width = std::max(width, s.size());
  os << "iteration";
  for (Index j = 0; j < width; ++j) os << ",s" << (j + 1);
  os << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < spectra.size(); ++t) {
    os << t;
    for (Index j = 0; j < spectra[t].size(); ++j) os << ',' << spectra[t](j);
    os << '\n';
  }
}

}  // namespace sketchycgm
