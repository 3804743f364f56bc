#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <type_traits>

#include "sketchycgm/error.hpp"

namespace sketchycgm {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using VecR = Vec<double>;
using VecC = Vec<cplx>;
using MatR = Mat<double>;
using MatC = Mat<cplx>;

template <class S>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class S>
inline constexpr bool is_complex_v = is_complex<S>::value;

/// Scalar fields a template can live over.
template <class S>
concept Field = std::same_as<S, double> || std::same_as<S, cplx>;

enum class FieldKind { real, complex };

template <Field S>
constexpr FieldKind field_of() {
  return is_complex_v<S> ? FieldKind::complex : FieldKind::real;
}

inline double conj_of(double x) { return x; }
inline cplx conj_of(const cplx& x) { return std::conj(x); }
inline double real_of(double x) { return x; }
inline double real_of(const cplx& x) { return x.real(); }

/// Re <a, b> with the conjugate on the first argument.
template <class DA, class DB>
double real_inner(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return real_of(a.dot(b));
}

template <class D>
bool all_finite(const Eigen::MatrixBase<D>& x) {
  return x.allFinite();
}

namespace detail {

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// Standard normal entry; complex draws have independent N(0, 1/2) parts so
/// that E|x|^2 = 1.
template <Field S>
S draw_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  if constexpr (is_complex_v<S>) {
    const double re = nd(rng);
    const double im = nd(rng);
    return cplx(re, im) * std::sqrt(0.5);
  } else {
    return nd(rng);
  }
}

template <Field S>
Mat<S> random_normal(Index rows, Index cols, std::mt19937_64& rng) {
  Mat<S> out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = draw_normal<S>(rng);
  return out;
}

template <Field S>
Vec<S> random_normal_vec(Index n, std::mt19937_64& rng) {
  Vec<S> out(n);
  for (Index i = 0; i < n; ++i) out(i) = draw_normal<S>(rng);
  return out;
}

/// Unit-modulus factor that turns the largest-magnitude entry of x real positive.
template <class D>
auto canonical_phase(const Eigen::MatrixBase<D>& x) {
  using S = typename D::Scalar;
  Index arg = 0;
  double best = -1.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x(i));
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (best <= 0.0) return S(1);
  if constexpr (is_complex_v<S>) {
    return std::conj(x(arg)) / best;
  } else {
    return x(arg) > 0 ? 1.0 : -1.0;
  }
}

}  // namespace detail
}  // namespace sketchycgm
