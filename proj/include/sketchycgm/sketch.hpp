#pragma once

// Two-sided randomized sketch of an implicit m x n matrix X that is only ever
// modified by rank-one linear updates X <- b1 X + b2 u v^*.
//
//   Omega : n x k,  k = 2r + 1      Y = X Omega  (range sketch)
//   Psi   : l x m,  l = 4r + 3      W = Psi X    (co-range sketch)
//
// Reconstruction: Q = orth(Y), B = (Psi Q) \ W, X_hat = Q [B]_r.

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "sketchycgm/ledger.hpp"
#include "sketchycgm/types.hpp"

namespace sketchycgm {

struct SketchDims {
  Index m = 0;
  Index n = 0;
  Index r = 0;
  Index k = 0;  // range sketch width, 2r + 1
  Index l = 0;  // co-range sketch height, 4r + 3

  static SketchDims for_rank(Index m, Index n, Index r) {
    detail::require(m >= 1 && n >= 1, "sketch: matrix dimensions must be >= 1");
    detail::require(r >= 1, "sketch: target rank must be >= 1");
    return SketchDims{m, n, r, 2 * r + 1, 4 * r + 3};
  }

  /// Scalars held by Omega, Psi, Y and W.
  std::int64_t storage_scalars() const { return n * k + l * m + m * k + l * n; }
};

/// Rank-r matrix U diag(sigma) V^*; sigma is nonincreasing and nonnegative.
template <Field S>
struct FactoredMatrix {
  Mat<S> U;
  VecR sigma;
  Mat<S> V;

  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }
  Index rank() const { return sigma.size(); }

  S entry(Index i, Index j) const {
    S acc(0);
    for (Index t = 0; t < sigma.size(); ++t) acc += U(i, t) * sigma(t) * conj_of(V(j, t));
    return acc;
  }

  /// Dense U diag(sigma) V^*; small sizes only.
  Mat<S> dense() const { return U * sigma.asDiagonal() * V.adjoint(); }

  /// Leading factor scaled by sqrt(sigma_1): the signal estimate when the
  /// matrix is a psd lift x x^*.
  Vec<S> top_vector() const {
    if (sigma.size() == 0) return Vec<S>::Zero(U.rows());
    return U.col(0) * std::sqrt(std::max(sigma(0), 0.0));
  }
};

template <Field S>
class Sketch {
 public:
  /// Draws Omega and Psi from the seeded generator; Y = 0, W = 0.
  Sketch(Index m, Index n, Index r, std::uint64_t seed)
      : dims_(SketchDims::for_rank(m, n, r)),
        seed_(seed),
        lease_(LedgerModule::sketch, dims_.storage_scalars()) {
    auto rng_omega = detail::make_rng(seed, 0x0E6Au);
    auto rng_psi = detail::make_rng(seed, 0x951u);
    omega_ = detail::random_normal<S>(dims_.n, dims_.k, rng_omega);
    psi_ = detail::random_normal<S>(dims_.l, dims_.m, rng_psi);
    y_ = Mat<S>::Zero(dims_.m, dims_.k);
    w_ = Mat<S>::Zero(dims_.l, dims_.n);
  }

  const SketchDims& dims() const { return dims_; }
  std::uint64_t seed() const { return seed_; }
  const Mat<S>& omega() const { return omega_; }
  const Mat<S>& psi() const { return psi_; }
  const Mat<S>& range_sketch() const { return y_; }
  const Mat<S>& corange_sketch() const { return w_; }

  /// X <- (1 - eta) X + eta u v^*.
  void cgm_update(const Vec<S>& u, const Vec<S>& v, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("cgm_update: eta must lie in [0, 1]");
    linear_update(1.0 - eta, eta, u, v);
  }

  /// X <- beta1 X + beta2 u v^*.
  void linear_update(S beta1, S beta2, const Vec<S>& u, const Vec<S>& v) {
    detail::require_dims(u.size() == dims_.m, "sketch update: u has wrong length");
    detail::require_dims(v.size() == dims_.n, "sketch update: v has wrong length");
    y_ *= beta1;
    w_ *= beta1;
    if (beta2 == S(0)) return;
    const Vec<S> v_omega = omega_.transpose() * v.conjugate();  // (v^* Omega)^T
    const Vec<S> psi_u = psi_ * u;
    y_.noalias() += (beta2 * u) * v_omega.transpose();
    w_.noalias() += (beta2 * psi_u) * v.adjoint();
  }

  /// X <- beta1 X + beta2 H for an explicit m x n matrix H (tests, small problems).
  void linear_update(S beta1, S beta2, const Mat<S>& h) {
    detail::require_dims(h.rows() == dims_.m && h.cols() == dims_.n, "sketch update: H has wrong shape");
    y_ *= beta1;
    w_ *= beta1;
    y_.noalias() += beta2 * (h * omega_);
    w_.noalias() += beta2 * (psi_ * h);
  }

  /// Rank-r approximation from the current sketch, without forming m x n data.
  FactoredMatrix<S> reconstruct(Index r) const {
    detail::require(r >= 1 && r <= dims_.r, "reconstruct: rank must lie in [1, sketch rank]");
    const Index kq = std::min(dims_.m, dims_.k);
    Eigen::HouseholderQR<Mat<S>> range_qr(y_);
    const Mat<S> q = range_qr.householderQ() * Mat<S>::Identity(dims_.m, kq);

    const Mat<S> psi_q = psi_ * q;
    Eigen::HouseholderQR<Mat<S>> ls(psi_q);
    const auto diag = ls.matrixQR().diagonal().cwiseAbs();
    if (diag.minCoeff() <= 1e-12 * diag.maxCoeff())
      throw RankDeficientPsiQ("reconstruct: Psi Q is numerically rank deficient");
    const Mat<S> b = ls.solve(w_);

    Eigen::JacobiSVD<Mat<S>> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index keep = std::min<Index>(r, svd.singularValues().size());
    FactoredMatrix<S> out;
    out.U = q * svd.matrixU().leftCols(keep);
    out.sigma = svd.singularValues().head(keep);
    out.V = svd.matrixV().leftCols(keep);
    return out;
  }

  /// Psd variant: reconstruct, symmetrize (X_hat + X_hat^*) / 2 in factored
  /// form, then keep the top-r eigenpairs with negative eigenvalues clipped.
  FactoredMatrix<S> reconstruct_psd(Index r) const {
    detail::require(dims_.m == dims_.n, "reconstruct_psd: sketch must be square");
    const FactoredMatrix<S> raw = reconstruct(r);
    const Index rr = raw.rank();
    Mat<S> basis(dims_.n, 2 * rr);
    basis << raw.U, raw.V;
    const Index kb = std::min<Index>(dims_.n, 2 * rr);
    Eigen::HouseholderQR<Mat<S>> qr(basis);
    const Mat<S> qb = qr.householderQ() * Mat<S>::Identity(dims_.n, kb);
    const Mat<S> rb = qr.matrixQR().topRows(kb).template triangularView<Eigen::Upper>();

    Mat<S> middle = Mat<S>::Zero(2 * rr, 2 * rr);
    middle.topRightCorner(rr, rr) = raw.sigma.template cast<S>().asDiagonal();
    middle.bottomLeftCorner(rr, rr) = raw.sigma.template cast<S>().asDiagonal();
    Mat<S> core = rb * middle * rb.adjoint() * S(0.5);
    core = (0.5 * (core + core.adjoint())).eval();

    Eigen::SelfAdjointEigenSolver<Mat<S>> eig(core);
    const Index keep = std::min<Index>(r, kb);
    FactoredMatrix<S> out;
    out.U.resize(dims_.n, keep);
    out.sigma.resize(keep);
    for (Index j = 0; j < keep; ++j) {
      const Index src = kb - 1 - j;  // eigenvalues ascend
      out.U.col(j) = qb * eig.eigenvectors().col(src);
      out.sigma(j) = std::max(eig.eigenvalues()(src), 0.0);
    }
    out.V = out.U;
    return out;
  }

 private:
  SketchDims dims_;
  std::uint64_t seed_;
  Mat<S> omega_;
  Mat<S> psi_;
  Mat<S> y_;
  Mat<S> w_;
  ScalarLease lease_;
};

// ---------------------------------------------------------------------------
// Text serialization: U.csv, S.csv, V.csv. Complex matrices are written with
// each column expanded to a (re, im) pair.

namespace detail {

template <Field S>
void write_matrix_csv(const std::filesystem::path& path, const Mat<S>& a) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) os << ',';
      if constexpr (is_complex_v<S>) {
        os << a(i, j).real() << ',' << a(i, j).imag();
      } else {
        os << a(i, j);
      }
    }
    os << '\n';
  }
}

inline std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ParseError(path.filename().string() + ": bad number '" + cell + "'", lineno);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path.filename().string() + ": ragged row", lineno);
    rows.push_back(std::move(row));
  }
  return rows;
}

template <Field S>
Mat<S> read_matrix_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) return Mat<S>(0, 0);
  const Index width = static_cast<Index>(rows.front().size());
  if constexpr (is_complex_v<S>) {
    if (width % 2 != 0) throw ParseError(path.filename().string() + ": odd column count", 1);
    Mat<S> a(static_cast<Index>(rows.size()), width / 2);
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) a(i, j) = cplx(rows[i][2 * j], rows[i][2 * j + 1]);
    return a;
  } else {
    Mat<S> a(static_cast<Index>(rows.size()), width);
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[i][j];
    return a;
  }
}

}  // namespace detail

template <Field S>
void write_factored(const std::filesystem::path& dir, const FactoredMatrix<S>& f) {
  std::filesystem::create_directories(dir);
  detail::write_matrix_csv<S>(dir / "U.csv", f.U);
  detail::write_matrix_csv<double>(dir / "S.csv", MatR(f.sigma));
  detail::write_matrix_csv<S>(dir / "V.csv", f.V);
}

template <Field S>
FactoredMatrix<S> read_factored(const std::filesystem::path& dir) {
  FactoredMatrix<S> f;
  f.U = detail::read_matrix_csv<S>(dir / "U.csv");
  const MatR s = detail::read_matrix_csv<double>(dir / "S.csv");
  f.sigma = s.size() == 0 ? VecR() : VecR(s.col(0));
  f.V = detail::read_matrix_csv<S>(dir / "V.csv");
  if (f.U.cols() != f.sigma.size() || f.V.cols() != f.sigma.size())
    throw ParseError("factor files disagree on rank", 1);
  return f;
}

}  // namespace sketchycgm
