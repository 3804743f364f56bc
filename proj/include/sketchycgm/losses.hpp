#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "sketchycgm/ledger.hpp"
#include "sketchycgm/types.hpp"

namespace sketchycgm {

enum class LossKind { gauss, huber, logistic, poisson };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::gauss: return "gauss";
    case LossKind::huber: return "huber";
    case LossKind::logistic: return "logistic";
    case LossKind::poisson: return "poisson";
  }
  return "unknown";
}

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "gauss") return LossKind::gauss;
  if (s == "huber") return LossKind::huber;
  if (s == "logistic") return LossKind::logistic;
  if (s == "poisson") return LossKind::poisson;
  throw InvalidArgument("unknown loss kind '" + std::string(s) + "'");
}

/// Lower clamp on z inside the Poisson loss.
inline constexpr double kPoissonFloor = 1e-12;

/// Separable loss f(z) = scale * sum_i psi(z_i; b_i).
///
///   gauss     psi = (z - b)^2 / 2
///   huber     psi = r^2 / 2 for |r| <= delta, delta (|r| - delta / 2) otherwise, r = z - b
///   logistic  psi = log(1 + exp(-b z)),  b in {-1, +1}
///   poisson   psi = z - b log z,         b >= 0, z clamped below at 1e-12
class Loss {
 public:
  Loss(LossKind kind, VecR data, double scale = 1.0, double huber_delta = 1.0)
      : kind_(kind),
        b_(std::move(data)),
        scale_(scale),
        delta_(huber_delta),
        lease_(LedgerModule::losses, b_.size()) {
    detail::require(b_.size() >= 1, "loss: empty data vector");
    detail::require(scale_ > 0.0 && std::isfinite(scale_), "loss: scale must be positive");
    detail::require(delta_ > 0.0, "loss: huber delta must be positive");
    if (!b_.allFinite()) throw NonFiniteInput("loss: data has non-finite entries");
    if (kind_ == LossKind::logistic) {
      for (Index i = 0; i < b_.size(); ++i)
        if (b_(i) != 1.0 && b_(i) != -1.0)
          throw DomainError("logistic loss: labels must be -1 or +1");
    }
    if (kind_ == LossKind::poisson) {
      for (Index i = 0; i < b_.size(); ++i)
        if (b_(i) < 0.0) throw DomainError("poisson loss: data must be nonnegative");
    }
  }

  /// Scale 1/d, the normalization used for matrix completion.
  static Loss averaged(LossKind kind, VecR data, double huber_delta = 1.0) {
    const double d = static_cast<double>(data.size());
    return Loss(kind, std::move(data), 1.0 / d, huber_delta);
  }

  LossKind kind() const { return kind_; }
  const VecR& data() const { return b_; }
  double scale() const { return scale_; }
  double huber_delta() const { return delta_; }
  Index size() const { return b_.size(); }

  double value(const VecR& z) const {
    check(z);
    double acc = 0.0;
    for (Index i = 0; i < z.size(); ++i) acc += psi(z(i), b_(i));
    return scale_ * acc;
  }

  VecR gradient(const VecR& z) const {
    check(z);
    VecR g(z.size());
    for (Index i = 0; i < z.size(); ++i) g(i) = scale_ * dpsi(z(i), b_(i));
    return g;
  }

  /// Unscaled per-entry loss; also used for test-error evaluation.
  double psi(double z, double b) const {
    switch (kind_) {
      case LossKind::gauss: return 0.5 * (z - b) * (z - b);
      case LossKind::huber: {
        const double r = std::abs(z - b);
        return r <= delta_ ? 0.5 * r * r : delta_ * (r - 0.5 * delta_);
      }
      case LossKind::logistic: return softplus(-b * z);
      case LossKind::poisson: {
        const double zc = std::max(z, kPoissonFloor);
        return b == 0.0 ? zc : zc - b * std::log(zc);
      }
    }
    return 0.0;
  }

  double dpsi(double z, double b) const {
    switch (kind_) {
      case LossKind::gauss: return z - b;
      case LossKind::huber: return std::clamp(z - b, -delta_, delta_);
      case LossKind::logistic: return -b * sigmoid(-b * z);
      case LossKind::poisson: return 1.0 - b / std::max(z, kPoissonFloor);
    }
    return 0.0;
  }

 private:
  void check(const VecR& z) const {
    if (z.size() != b_.size())
      throw DimensionMismatch("loss: argument has length " + std::to_string(z.size()) +
                              ", data has " + std::to_string(b_.size()));
    if (!z.allFinite()) throw NonFiniteInput("loss: argument has non-finite entries");
  }

  // log(1 + exp(x)) without overflow.
  static double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
  static double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  LossKind kind_;
  VecR b_;
  double scale_;
  double delta_;
  ScalarLease lease_;
};

}  // namespace sketchycgm
