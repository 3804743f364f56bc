#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's FFT, Lanczos or sketch code.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "sketchycgm/sketchycgm.hpp"

namespace oracle {

using namespace sketchycgm;

/// Explicit DFT matrix with entries exp(-2 pi i jk / n), optionally unitary.
inline MatC dft_matrix(Index n, bool unitary) {
  MatC f(n, n);
  const double scale = unitary ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      f(j, k) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(j * k % n) / static_cast<double>(n));
  return f;
}

/// d x n matrix whose rows are a_i^*, so that A(X)_i = a_i^* X a_i.
inline MatC coded_diffraction_rows(const CodedDiffraction& op) {
  const Index n = op.signal_length(), s = op.views();
  const MatC f = dft_matrix(n, op.scaling() == DftScaling::unitary);
  MatC a(n * s, n);
  for (Index l = 0; l < s; ++l) a.middleRows(l * n, n) = f * op.diagonals().col(l).asDiagonal();
  return a;
}

inline MatC ptychography_rows(const PtychographyBandpass& op) {
  const Index n = op.rows(), q = op.patch();
  const MatC fn = dft_matrix(n, true);
  const MatC fq_adj = dft_matrix(q, true).adjoint();
  MatC a(op.measurements(), n);
  for (Index l = 0; l < op.views(); ++l) {
    MatC select = MatC::Zero(q, n);
    for (Index j = 0; j < q; ++j) select(j, op.spec().masks[l][j]) = 1.0;
    a.middleRows(l * q, q) = fq_adj * select * fn;
  }
  return a;
}

/// A measurement operator defined by explicit coefficient matrices,
/// A(X)_i = <A_i, X> = tr(A_i^* X) and A^*(z) = sum_i z_i A_i.
template <Field S>
class DenseOperator {
 public:
  using Scalar = S;
  static constexpr bool kHermitianMeasurements = is_complex_v<S>;
  static constexpr std::string_view kKind = "dense_oracle";

  explicit DenseOperator(std::vector<Mat<S>> coeffs) : a_(std::move(coeffs)) {}

  static DenseOperator from_entries(Index m, Index n, const std::vector<Entry>& entries) {
    std::vector<Mat<S>> c;
    for (const auto& e : entries) {
      Mat<S> a = Mat<S>::Zero(m, n);
      a(e.row, e.col) = S(1);
      c.push_back(a);
    }
    return DenseOperator(std::move(c));
  }

  /// Rows a_i^* of a phase-retrieval matrix become A_i = a_i a_i^*.
  static DenseOperator from_rows(const MatC& rows) {
    std::vector<Mat<S>> c;
    for (Index i = 0; i < rows.rows(); ++i) {
      const VecC a = rows.row(i).adjoint();
      c.push_back(a * a.adjoint());
    }
    return DenseOperator(std::move(c));
  }

  Index rows() const { return a_.front().rows(); }
  Index cols() const { return a_.front().cols(); }
  Index measurements() const { return static_cast<Index>(a_.size()); }
  const Mat<S>& coefficient(Index i) const { return a_[static_cast<std::size_t>(i)]; }

  Vec<S> measure(const Mat<S>& x) const {
    Vec<S> out(measurements());
    for (Index i = 0; i < measurements(); ++i) out(i) = (coefficient(i).adjoint() * x).trace();
    return out;
  }
  Mat<S> adjoint(const Vec<S>& z) const {
    Mat<S> out = Mat<S>::Zero(rows(), cols());
    for (Index i = 0; i < measurements(); ++i) out += z(i) * coefficient(i);
    return out;
  }

  Vec<S> apply_rank_one(const Vec<S>& u, const Vec<S>& v) const { return measure(u * v.adjoint()); }
  Vec<S> left_apply_adjoint(const Vec<S>& z, const Vec<S>& u) const { return adjoint(z).adjoint() * u; }
  Vec<S> right_apply_adjoint(const Vec<S>& z, const Vec<S>& v) const { return adjoint(z) * v; }

 private:
  std::vector<Mat<S>> a_;
};

/// Central differences of f at x, step h per coordinate.
inline VecR finite_difference(const std::function<double(const VecR&)>& f, const VecR& x, double h) {
  VecR g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    VecR xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// min over a uniform phase grid of ||e^{i phi} xhat - x|| / ||x||.
inline double phase_grid_error(const VecC& xhat, const VecC& x, int points) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const cplx rot = std::polar(1.0, 2.0 * std::numbers::pi * k / points);
    best = std::min(best, (rot * xhat - x).norm() / x.norm());
  }
  return best;
}

/// Euclidean projection of a nonnegative vector onto {w >= 0, sum w <= alpha}.
inline VecR project_capped_simplex(const VecR& v, double alpha) {
  VecR w = v.cwiseMax(0.0);
  if (w.sum() <= alpha) return w;
  std::vector<double> s(w.data(), w.data() + w.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cum += s[j];
    const double t = (cum - alpha) / static_cast<double>(j + 1);
    if (j + 1 == s.size() || s[j + 1] <= t) {
      theta = t;
      break;
    }
  }
  return (w.array() - theta).cwiseMax(0.0).matrix();
}

/// Projection onto the Schatten-1 ball of radius alpha (real) or onto the
/// psd trace ball (Hermitian) via a dense decomposition.
template <Field S>
Mat<S> project(const Mat<S>& x, double alpha, Template tmpl) {
  if (tmpl == Template::schatten1) {
    Eigen::JacobiSVD<Mat<S>> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VecR s = project_capped_simplex(svd.singularValues(), alpha);
    const Index k = s.size();
    return svd.matrixU().leftCols(k) * s.cast<S>().asDiagonal() * svd.matrixV().leftCols(k).adjoint();
  }
  const Mat<S> h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat<S>> eig(h);
  const VecR lam = project_capped_simplex(eig.eigenvalues(), alpha);
  return eig.eigenvectors() * lam.cast<S>().asDiagonal() * eig.eigenvectors().adjoint();
}

struct Optimum {
  double value = 0.0;     // f at the final iterate
  double fw_gap = 0.0;    // Frank-Wolfe gap there, an upper bound on value - f*
  MatC x;                 // final iterate (complex storage for both fields)
  int iterations = 0;
};

/// Accelerated projected gradient (FISTA with restarts) on the dense problem
///   min f(A X)  s.t.  X in the Schatten-1 ball / psd trace ball.
/// The step is 1/L with L = lipschitz * ||A||^2 estimated by power iteration.
template <Field S>
Optimum projected_gradient(const DenseOperator<S>& op, const Loss& loss, double alpha, Template tmpl,
                           double lipschitz, int max_iters, double target_gap) {
  const Index m = op.rows(), n = op.cols();
  auto meas = [&](const Mat<S>& x) -> VecR { return op.measure(x).real(); };
  auto grad_mat = [&](const Mat<S>& x) -> Mat<S> {
    return op.adjoint(loss.gradient(meas(x)).template cast<S>());
  };
  // ||A||^2 by power iteration on A^* A.
  Mat<S> p = Mat<S>::Ones(m, n);
  if (tmpl == Template::psd) p = Mat<S>::Identity(m, n);
  double norm2 = 1.0;
  for (int k = 0; k < 200; ++k) {
    Mat<S> q = op.adjoint(op.measure(p));
    if (tmpl == Template::psd) q = 0.5 * (q + q.adjoint()).eval();
    norm2 = q.norm() / p.norm();
    p = q / q.norm();
  }
  const double step = 1.0 / (lipschitz * norm2 * 1.05);

  auto fw_gap = [&](const Mat<S>& x) {
    const Mat<S> g = grad_mat(x);
    double lmo;
    if (tmpl == Template::schatten1) {
      Eigen::JacobiSVD<Mat<S>> svd(g);
      lmo = -alpha * svd.singularValues()(0);
    } else {
      Eigen::SelfAdjointEigenSolver<Mat<S>> eig(0.5 * (g + g.adjoint()));
      lmo = std::min(0.0, alpha * eig.eigenvalues()(0));
    }
    return real_of((g.adjoint() * x).trace()) - lmo;
  };

  Mat<S> x = Mat<S>::Zero(m, n), y = x;
  double tk = 1.0, fprev = loss.value(meas(x));
  Optimum out;
  for (int k = 0; k < max_iters; ++k) {
    const Mat<S> xn = project<S>(y - step * grad_mat(y), alpha, tmpl);
    const double fn = loss.value(meas(xn));
    if (fn > fprev && tk > 1.0) {  // adaptive restart; a plain gradient step is always accepted
      y = x;
      tk = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = xn + ((tk - 1.0) / tn) * (xn - x);
    x = xn;
    tk = tn;
    fprev = fn;
    out.iterations = k + 1;
    if (k % 25 == 0 && fw_gap(x) <= target_gap) break;
  }
  out.value = loss.value(meas(x));
  out.fw_gap = fw_gap(x);
  out.x = x.template cast<cplx>();
  return out;
}

}  // namespace oracle
