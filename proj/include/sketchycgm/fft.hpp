#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "sketchycgm/types.hpp"

namespace sketchycgm {

/// DFT scaling. `unitary` uses 1/sqrt(n) in both directions; `unnormalized`
/// applies F with unit-modulus entries exp(-2 pi i jk / n) and its adjoint
/// F^* (so F^* F = n I).
enum class DftScaling { unitary, unnormalized };

namespace detail {

inline Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

/// out = F x.
inline void dft_forward(const VecC& x, VecC& out, DftScaling scaling) {
  if (x.size() == 1) {  // kissfft does not handle length 1
    out = x;
    return;
  }
  thread_fft().fwd(out, x);
  if (scaling == DftScaling::unitary) out /= std::sqrt(static_cast<double>(x.size()));
}

/// out = F^* x.
inline void dft_adjoint(const VecC& x, VecC& out, DftScaling scaling) {
  if (x.size() == 1) {
    out = x;
    return;
  }
  thread_fft().inv(out, x);
  if (scaling == DftScaling::unitary) out /= std::sqrt(static_cast<double>(x.size()));
}

}  // namespace detail
}  // namespace sketchycgm
