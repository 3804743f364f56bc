#pragma once

// Black-box linear measurement maps A : F^{m x n} -> F^d. Each family only
// exposes the three primitives
//
//   apply_rank_one(u, v)      = A(u v^*)
//   left_apply_adjoint(z, u)  = (A^* z)^* u      (the row u^*(A^* z), conjugated)
//   right_apply_adjoint(z, v) = (A^* z) v
//
// with <A(u v^*), z> = <left_apply_adjoint(z, u), v> for the inner product
// <a, b> = a^* b. No family ever materializes an m x n matrix.

#include <algorithm>
#include <concepts>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sketchycgm/fft.hpp"
#include "sketchycgm/ledger.hpp"
#include "sketchycgm/types.hpp"

namespace sketchycgm {

template <class Op>
concept MeasurementOperator =
    Field<typename Op::Scalar> &&
    requires(const Op& op, const Vec<typename Op::Scalar>& x) {
      { op.rows() } -> std::convertible_to<Index>;
      { op.cols() } -> std::convertible_to<Index>;
      { op.measurements() } -> std::convertible_to<Index>;
      { Op::kHermitianMeasurements } -> std::convertible_to<bool>;
      { op.apply_rank_one(x, x) } -> std::same_as<Vec<typename Op::Scalar>>;
      { op.left_apply_adjoint(x, x) } -> std::same_as<Vec<typename Op::Scalar>>;
      { op.right_apply_adjoint(x, x) } -> std::same_as<Vec<typename Op::Scalar>>;
    };

namespace detail {

template <class D>
void check_input(const Eigen::MatrixBase<D>& x, Index expected, const char* what) {
  if (x.size() != expected)
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(expected) +
                            ", got " + std::to_string(x.size()));
  if (!x.allFinite()) throw NonFiniteInput(std::string(what) + " has non-finite entries");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry sampling: A X = { X_ij : (i, j) in E }.

struct Entry {
  Index row = 0;
  Index col = 0;
  friend bool operator==(const Entry&, const Entry&) = default;
  friend auto operator<=>(const Entry&, const Entry&) = default;
};

/// Observed index set E for matrix completion, 0-indexed, no repeated pairs.
struct EntrySamplingSpec {
  Index rows = 0;
  Index cols = 0;
  std::vector<Entry> entries;
};

template <Field S = double>
class EntrySampling {
 public:
  using Scalar = S;
  static constexpr bool kHermitianMeasurements = false;
  static constexpr std::string_view kKind = "entry_sampling";

  explicit EntrySampling(EntrySamplingSpec spec)
      : spec_(std::move(spec)),
        lease_(LedgerModule::operators, 2 * static_cast<std::int64_t>(spec_.entries.size())) {
    detail::require(spec_.rows >= 1 && spec_.cols >= 1, "entry sampling: dimensions must be >= 1");
    detail::require(!spec_.entries.empty(), "entry sampling: index set is empty");
    for (const auto& e : spec_.entries) {
      if (e.row < 0 || e.row >= spec_.rows || e.col < 0 || e.col >= spec_.cols)
        throw IndexOutOfRange("entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                              ") outside " + std::to_string(spec_.rows) + "x" +
                              std::to_string(spec_.cols));
    }
    std::vector<Entry> sorted = spec_.entries;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw InvalidArgument("entry sampling: duplicate index pair");
  }

  EntrySampling(Index m, Index n, std::vector<Entry> entries)
      : EntrySampling(EntrySamplingSpec{m, n, std::move(entries)}) {}

  Index rows() const { return spec_.rows; }
  Index cols() const { return spec_.cols; }
  Index measurements() const { return static_cast<Index>(spec_.entries.size()); }
  const std::vector<Entry>& entries() const { return spec_.entries; }
  const EntrySamplingSpec& spec() const { return spec_; }

  Vec<S> apply_rank_one(const Vec<S>& u, const Vec<S>& v) const {
    detail::check_input(u, rows(), "apply_rank_one: u");
    detail::check_input(v, cols(), "apply_rank_one: v");
    Vec<S> out(measurements());
    for (Index k = 0; k < measurements(); ++k) {
      const auto& e = spec_.entries[k];
      out(k) = u(e.row) * conj_of(v(e.col));
    }
    return out;
  }

  Vec<S> left_apply_adjoint(const Vec<S>& z, const Vec<S>& u) const {
    detail::check_input(z, measurements(), "left_apply_adjoint: z");
    detail::check_input(u, rows(), "left_apply_adjoint: u");
    Vec<S> out = Vec<S>::Zero(cols());
    for (Index k = 0; k < measurements(); ++k) {
      const auto& e = spec_.entries[k];
      out(e.col) += conj_of(z(k)) * u(e.row);
    }
    return out;
  }

  Vec<S> right_apply_adjoint(const Vec<S>& z, const Vec<S>& v) const {
    detail::check_input(z, measurements(), "right_apply_adjoint: z");
    detail::check_input(v, cols(), "right_apply_adjoint: v");
    Vec<S> out = Vec<S>::Zero(rows());
    for (Index k = 0; k < measurements(); ++k) {
      const auto& e = spec_.entries[k];
      out(e.row) += z(k) * v(e.col);
    }
    return out;
  }

 private:
  EntrySamplingSpec spec_;
  ScalarLease lease_;
};

// ---------------------------------------------------------------------------
// Phase-retrieval families: A X = diag(A X A^*) for a d x n matrix A that is
// only ever applied through FFTs. For these the rank-one image is
// (A u) .* conj(A v) and A^* z = A^* diag(z) A.

/// Coded diffraction patterns: A = blkdiag(F_n, ..., F_n) [D_1; ...; D_s].
class CodedDiffraction {
 public:
  using Scalar = cplx;
  static constexpr bool kHermitianMeasurements = true;
  static constexpr std::string_view kKind = "coded_diffraction";

  /// `diagonals` is n x s; column l holds the diagonal of D_l.
  explicit CodedDiffraction(MatC diagonals, DftScaling scaling = DftScaling::unitary)
      : diag_(std::move(diagonals)),
        scaling_(scaling),
        lease_(LedgerModule::operators, diag_.size()) {
    detail::require(diag_.rows() >= 1 && diag_.cols() >= 1,
                    "coded diffraction: n and s must be >= 1");
  }

  Index rows() const { return diag_.rows(); }
  Index cols() const { return diag_.rows(); }
  Index signal_length() const { return diag_.rows(); }
  Index views() const { return diag_.cols(); }
  Index measurements() const { return diag_.size(); }
  const MatC& diagonals() const { return diag_; }
  DftScaling scaling() const { return scaling_; }

  /// A x, length s*n.
  VecC forward(const VecC& x) const {
    const Index n = signal_length();
    VecC out(measurements());
    VecC buf(n), spec(n);
    for (Index l = 0; l < views(); ++l) {
      buf = diag_.col(l).cwiseProduct(x);
      detail::dft_forward(buf, spec, scaling_);
      out.segment(l * n, n) = spec;
    }
    return out;
  }

  /// A^* y, length n.
  VecC adjoint(const VecC& y) const {
    const Index n = signal_length();
    VecC out = VecC::Zero(n);
    VecC buf(n), back(n);
    for (Index l = 0; l < views(); ++l) {
      buf = y.segment(l * n, n);
      detail::dft_adjoint(buf, back, scaling_);
      out += diag_.col(l).conjugate().cwiseProduct(back);
    }
    return out;
  }

  VecC apply_rank_one(const VecC& u, const VecC& v) const {
    detail::check_input(u, rows(), "apply_rank_one: u");
    detail::check_input(v, cols(), "apply_rank_one: v");
    return forward(u).cwiseProduct(forward(v).conjugate());
  }

  VecC left_apply_adjoint(const VecC& z, const VecC& u) const {
    detail::check_input(z, measurements(), "left_apply_adjoint: z");
    detail::check_input(u, rows(), "left_apply_adjoint: u");
    return adjoint(z.conjugate().cwiseProduct(forward(u)));
  }

  VecC right_apply_adjoint(const VecC& z, const VecC& v) const {
    detail::check_input(z, measurements(), "right_apply_adjoint: z");
    detail::check_input(v, cols(), "right_apply_adjoint: v");
    return adjoint(z.cwiseProduct(forward(v)));
  }

 private:
  MatC diag_;
  DftScaling scaling_;
  ScalarLease lease_;
};

/// Random modulations: each entry is U1 * U2 with U1 uniform on {1, i, -1, -i}
/// and U2 in {sqrt(2)/2, sqrt(3)} with probabilities 0.8 / 0.2.
inline CodedDiffraction build_coded_diffraction(Index n, Index s, std::uint64_t seed,
                                                DftScaling scaling = DftScaling::unitary) {
  detail::require(n >= 1 && s >= 1, "build_coded_diffraction: n and s must be >= 1");
  auto rng = detail::make_rng(seed, 0xC0DEDu);
  std::uniform_int_distribution<int> quarter(0, 3);
  std::bernoulli_distribution large(0.2);
  static const cplx kUnits[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  MatC diag(n, s);
  for (Index l = 0; l < s; ++l) {
    for (Index j = 0; j < n; ++j) {
      const cplx u1 = kUnits[quarter(rng)];
      const double u2 = large(rng) ? std::sqrt(3.0) : std::sqrt(2.0) / 2.0;
      diag(j, l) = u1 * u2;
    }
  }
  return CodedDiffraction(std::move(diag), scaling);
}

/// Synthetic Fourier-ptychography bandpass map
///   A = blkdiag(F_q^*, ..., F_q^*) [D_1; ...; D_s] F_n
/// where D_l gathers q Fourier coefficients (one nonzero per row, at most one
/// per column). Both DFTs are unitary.
struct PtychographyBandpassSpec {
  Index n = 0;
  Index q = 0;
  std::vector<std::vector<Index>> masks;  // s masks of q coefficient indices
};

class PtychographyBandpass {
 public:
  using Scalar = cplx;
  static constexpr bool kHermitianMeasurements = true;
  static constexpr std::string_view kKind = "ptychography_bandpass";

  explicit PtychographyBandpass(PtychographyBandpassSpec spec)
      : spec_(std::move(spec)),
        lease_(LedgerModule::operators,
               static_cast<std::int64_t>(spec_.masks.size()) * spec_.q) {
    detail::require(spec_.n >= 1 && spec_.q >= 1 && spec_.q <= spec_.n,
                    "ptychography: need 1 <= q <= n");
    detail::require(!spec_.masks.empty(), "ptychography: need at least one view");
    for (const auto& mask : spec_.masks) {
      detail::require(static_cast<Index>(mask.size()) == spec_.q,
                      "ptychography: every mask must select q coefficients");
      std::vector<Index> sorted = mask;
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front() < 0 || sorted.back() >= spec_.n)
        throw IndexOutOfRange("ptychography: mask index outside [0, n)");
      detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                      "ptychography: a mask selects the same coefficient twice");
    }
  }

  Index rows() const { return spec_.n; }
  Index cols() const { return spec_.n; }
  Index views() const { return static_cast<Index>(spec_.masks.size()); }
  Index patch() const { return spec_.q; }
  Index measurements() const { return views() * spec_.q; }
  const PtychographyBandpassSpec& spec() const { return spec_; }

  VecC forward(const VecC& x) const {
    const Index q = spec_.q;
    VecC spectrum(spec_.n);
    detail::dft_forward(x, spectrum, DftScaling::unitary);
    VecC out(measurements());
    VecC window(q), patch(q);
    for (Index l = 0; l < views(); ++l) {
      const auto& mask = spec_.masks[l];
      for (Index j = 0; j < q; ++j) window(j) = spectrum(mask[j]);
      detail::dft_adjoint(window, patch, DftScaling::unitary);
      out.segment(l * q, q) = patch;
    }
    return out;
  }

  VecC adjoint(const VecC& y) const {
    const Index q = spec_.q;
    VecC spectrum = VecC::Zero(spec_.n);
    VecC window(q), patch(q);
    for (Index l = 0; l < views(); ++l) {
      patch = y.segment(l * q, q);
      detail::dft_forward(patch, window, DftScaling::unitary);
      const auto& mask = spec_.masks[l];
      for (Index j = 0; j < q; ++j) spectrum(mask[j]) += window(j);
    }
    VecC out(spec_.n);
    detail::dft_adjoint(spectrum, out, DftScaling::unitary);
    return out;
  }

  VecC apply_rank_one(const VecC& u, const VecC& v) const {
    detail::check_input(u, rows(), "apply_rank_one: u");
    detail::check_input(v, cols(), "apply_rank_one: v");
    return forward(u).cwiseProduct(forward(v).conjugate());
  }

  VecC left_apply_adjoint(const VecC& z, const VecC& u) const {
    detail::check_input(z, measurements(), "left_apply_adjoint: z");
    detail::check_input(u, rows(), "left_apply_adjoint: u");
    return adjoint(z.conjugate().cwiseProduct(forward(u)));
  }

  VecC right_apply_adjoint(const VecC& z, const VecC& v) const {
    detail::check_input(z, measurements(), "right_apply_adjoint: z");
    detail::check_input(v, cols(), "right_apply_adjoint: v");
    return adjoint(z.cwiseProduct(forward(v)));
  }

 private:
  PtychographyBandpassSpec spec_;
  ScalarLease lease_;
};

/// View l selects the circular window starting at floor(l n / s); q must be at
/// least ceil(n / s) so the windows jointly cover every coefficient.
inline PtychographyBandpass build_ptychography(Index n, Index q, Index s) {
  detail::require(n >= 1 && s >= 1 && q >= 1 && q <= n, "build_ptychography: need 1 <= q <= n");
  detail::require(q * s >= n && q >= (n + s - 1) / s,
                  "build_ptychography: windows of size q cannot cover all n coefficients");
  PtychographyBandpassSpec spec{n, q, {}};
  spec.masks.resize(s);
  for (Index l = 0; l < s; ++l) {
    const Index offset = (l * n) / s;
    spec.masks[l].resize(q);
    for (Index j = 0; j < q; ++j) spec.masks[l][j] = (offset + j) % n;
  }
  return PtychographyBandpass(std::move(spec));
}

// ---------------------------------------------------------------------------
// Helpers built on the primitives only.

/// A(sum_j lambda_j u_j u_j^*) for a psd matrix in factored form. The result
/// is real for Hermitian-measurement families; larger imaginary parts mean
/// the operator is broken.
template <MeasurementOperator Op>
VecR psd_measure(const Op& op, const Mat<typename Op::Scalar>& factors, const VecR& lambdas) {
  using S = typename Op::Scalar;
  detail::require_dims(factors.rows() == op.rows() && op.rows() == op.cols(),
                       "psd_measure: factor rows must equal n for a square operator");
  detail::require_dims(factors.cols() == lambdas.size(), "psd_measure: one eigenvalue per factor");
  for (Index j = 0; j < lambdas.size(); ++j)
    detail::require(lambdas(j) >= 0.0, "psd_measure: eigenvalues must be nonnegative");
  Vec<S> acc = Vec<S>::Zero(op.measurements());
  for (Index j = 0; j < factors.cols(); ++j) {
    if (lambdas(j) == 0.0) continue;
    const Vec<S> u = factors.col(j);
    acc += lambdas(j) * op.apply_rank_one(u, u);
  }
  VecR out = acc.real();
  if constexpr (is_complex_v<S>) {
    const double leak = acc.imag().norm();
    if (leak > 1e-8 * std::max(out.norm(), 1e-300))
      throw ImaginaryLeakage("psd_measure: imaginary residue " + std::to_string(leak));
  }
  return out;
}

/// A X for an explicit matrix, via the column expansion X = sum_j x_j e_j^*.
/// Test and dense-reference use only.
template <MeasurementOperator Op>
Vec<typename Op::Scalar> dense_measure(const Op& op, const Mat<typename Op::Scalar>& x) {
  using S = typename Op::Scalar;
  detail::require_dims(x.rows() == op.rows() && x.cols() == op.cols(),
                       "dense_measure: matrix shape does not match operator");
  Vec<S> out = Vec<S>::Zero(op.measurements());
  Vec<S> e = Vec<S>::Zero(op.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    e(j) = S(1);
    out += op.apply_rank_one(Vec<S>(x.col(j)), e);
    e(j) = S(0);
  }
  return out;
}

}  // namespace sketchycgm
