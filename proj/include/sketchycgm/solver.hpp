#pragma once

// SketchyCGM: conditional gradient driven by the dual iterate z_t = A X_t,
// with the primal X_t tracked only through a two-sided sketch.
//
// Per iteration t:
//   schatten1:  (u, v) = MaxSingVec(A^* grad f(z)),  H = -alpha u v^*
//   psd:        (lambda, u) = MinEig(A^* grad f(z)), H = alpha u u^* if lambda <= 0, else 0
//   h = A H,   gap = <z - h, grad f(z)>,   stop if gap <= eps
//   z <- (1 - eta) z + eta h,   sketch <- (1 - eta) sketch + eta H

#include <algorithm>
#include <chrono>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sketchycgm/ledger.hpp"
#include "sketchycgm/losses.hpp"
#include "sketchycgm/operators.hpp"
#include "sketchycgm/sketch.hpp"
#include "sketchycgm/spectral.hpp"

namespace sketchycgm {

enum class Template { schatten1, psd };
enum class Variant { standard, poisson };

inline std::string_view to_string(Template t) { return t == Template::psd ? "psd" : "schatten1"; }
inline std::string_view to_string(Variant v) { return v == Variant::poisson ? "poisson" : "standard"; }

inline Template parse_template(std::string_view s) {
  if (s == "schatten1") return Template::schatten1;
  if (s == "psd") return Template::psd;
  throw InvalidArgument("unknown template '" + std::string(s) + "'");
}

inline Variant parse_variant(std::string_view s) {
  if (s == "standard") return Variant::standard;
  if (s == "poisson") return Variant::poisson;
  throw InvalidArgument("unknown variant '" + std::string(s) + "'");
}

template <MeasurementOperator Op>
struct ProblemSpec {
  Op op;
  Loss loss;
  double alpha = 1.0;
  Template tmpl = Template::schatten1;
  Index rank = 1;
  double eps = 1e-6;
  int max_iters = 1000;
  Variant variant = Variant::standard;
  std::uint64_t seed = 0;
  SpectralConfig spectral{};

  void validate() const {
    detail::require(alpha > 0.0 && std::isfinite(alpha), "problem: alpha must be positive");
    detail::require(eps > 0.0, "problem: eps must be positive");
    detail::require(rank >= 1, "problem: rank must be >= 1");
    detail::require(max_iters >= 1, "problem: max_iters must be >= 1");
    detail::require_dims(loss.size() == op.measurements(),
                         "problem: loss data length must equal the measurement count");
    if (tmpl == Template::schatten1) {
      detail::require(!is_complex_v<typename Op::Scalar>,
                      "problem: the schatten1 template needs a real operator");
    } else {
      detail::require(op.rows() == op.cols(), "problem: the psd template needs a square domain");
      detail::require(Op::kHermitianMeasurements,
                      "problem: the psd template needs an operator with Hermitian measurements");
    }
    if (variant == Variant::poisson)
      detail::require(loss.kind() == LossKind::poisson, "problem: poisson variant needs poisson loss");
  }
};

/// eta_t = 2 / (t + 2), or 2 / (t + 3) for the Poisson variant.
inline double learning_rate(int t, Variant variant) {
  detail::require(t >= 0, "learning_rate: t must be >= 0");
  return 2.0 / (static_cast<double>(t) + (variant == Variant::poisson ? 3.0 : 2.0));
}

/// Start vector seed for the linear-minimization step at iteration t. Shared
/// with the dense reference so both runs see the same Krylov start.
inline std::uint64_t spectral_seed(std::uint64_t seed, int t) {
  return seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(t) + 1;
}

/// Rank-one update direction H = left * right^*; `zero` means H = 0.
template <Field S>
struct Direction {
  Vec<S> left;
  Vec<S> right;
  bool zero = false;
  double spectral_value = 0.0;  // sigma_max or lambda_min
  int spectral_iters = 0;
};

template <Field S>
struct DirectionResult {
  Direction<S> direction;
  VecR h;  // A H
};

/// Linear-minimization step over the Schatten-1 ball or the psd trace ball.
/// Throws ZeroGradient when grad is identically zero.
template <MeasurementOperator Op>
DirectionResult<typename Op::Scalar> compute_direction(const Op& op, const VecR& grad,
                                                       Template tmpl, double alpha,
                                                       const SpectralConfig& cfg) {
  using S = typename Op::Scalar;
  if (grad.squaredNorm() == 0.0) throw ZeroGradient("gradient is identically zero");
  ImplicitGradientMatrix<Op> g(op, grad);
  DirectionResult<S> out;
  if (tmpl == Template::schatten1) {
    auto trip = max_sing_vec(g, cfg);
    out.direction.left = -alpha * trip.u;
    out.direction.right = std::move(trip.v);
    out.direction.spectral_value = trip.sigma;
    out.direction.spectral_iters = trip.iterations;
    out.h = op.apply_rank_one(out.direction.left, out.direction.right).real();
  } else {
    auto pair = min_eig(g, cfg);
    out.direction.spectral_value = pair.lambda;
    out.direction.spectral_iters = pair.iterations;
    if (pair.lambda <= 0.0) {
      out.h = psd_measure(op, Mat<S>(pair.u), VecR::Constant(1, alpha));
      out.direction.left = alpha * pair.u;
      out.direction.right = std::move(pair.u);
    } else {
      out.direction.zero = true;
      out.direction.left = Vec<S>::Zero(op.rows());
      out.direction.right = Vec<S>::Zero(op.cols());
      out.h = VecR::Zero(op.measurements());
    }
  }
  return out;
}

/// <z - h, grad>.
inline double duality_gap(const VecR& z, const VecR& h, const VecR& grad) {
  detail::require_dims(z.size() == h.size() && z.size() == grad.size(),
                       "duality_gap: vectors must share length d");
  return (z - h).dot(grad);
}

struct IterationRecord {
  int t = 0;
  double objective = 0.0;
  double gap = 0.0;
  double eta = 0.0;
  double wall_ms = 0.0;
  std::vector<std::pair<std::string, double>> metrics;
};

/// Writes trace rows as CSV; metric columns are the union of metric names in
/// order of first appearance.
inline void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace) {
  std::vector<std::string> names;
  for (const auto& rec : trace)
    for (const auto& [name, value] : rec.metrics)
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  os << "t,eta,gap,objective,wall_ms";
  for (const auto& name : names) os << ',' << name;
  os << '\n';
  os << std::setprecision(17);
  for (const auto& rec : trace) {
    os << rec.t << ',' << rec.eta << ',' << rec.gap << ',' << rec.objective << ',' << rec.wall_ms;
    for (const auto& name : names) {
      os << ',';
      for (const auto& [key, value] : rec.metrics)
        if (key == name) os << value;
    }
    os << '\n';
  }
}

template <Field S>
struct StepEvent {
  int t;
  double eta;
  const Direction<S>& direction;
  const VecR& h;
  const VecR& z;  // after the update
  const Sketch<S>& sketch;
};

template <Field S>
using StepObserver = std::function<void(const StepEvent<S>&)>;

template <Field S>
using Evaluator = std::function<std::vector<std::pair<std::string, double>>(const FactoredMatrix<S>&)>;

template <Field S>
struct SolveOptions {
  StepObserver<S> observer;
  Evaluator<S> evaluator;
  int trace_every = 0;  // reconstruct + evaluate every N iterations; 0 = only at the end
};

template <MeasurementOperator Op>
class SketchyCgm {
 public:
  using Scalar = typename Op::Scalar;

  explicit SketchyCgm(const ProblemSpec<Op>& spec)
      : spec_(&validated(spec)),
        sketch_(spec.op.rows(), spec.op.cols(), spec.rank, spec.seed),
        lease_(LedgerModule::solver, 3 * spec.op.measurements()),
        start_(std::chrono::steady_clock::now()) {
    const Index d = spec.op.measurements();
    z_ = spec.variant == Variant::poisson ? VecR::Constant(d, 1.0 / std::sqrt(double(d)))
                                          : VecR::Zero(d);
  }

  void set_observer(StepObserver<Scalar> obs) { observer_ = std::move(obs); }

  /// One iteration. The gap is evaluated before the update; when it is
  /// already <= eps the state is left untouched and converged() turns true.
  IterationRecord step() {
    const auto& spec = *spec_;
    grad_ = spec.loss.gradient(z_);
    IterationRecord rec;
    rec.t = t_;
    rec.objective = spec.loss.value(z_);
    rec.eta = learning_rate(t_, spec.variant);

    SpectralConfig cfg = spec.spectral;
    cfg.seed = spectral_seed(spec.seed, t_);
    std::optional<DirectionResult<Scalar>> dir;
    try {
      dir = compute_direction(spec.op, grad_, spec.tmpl, spec.alpha, cfg);
      h_ = dir->h;
      rec.gap = duality_gap(z_, h_, grad_);
    } catch (const ZeroGradient&) {
      rec.gap = 0.0;
    }
    last_gap_ = rec.gap;
    rec.wall_ms = elapsed_ms();
    if (!dir || rec.gap <= spec.eps) {
      converged_ = true;
      return rec;
    }

    const double eta = rec.eta;
    z_ = (1.0 - eta) * z_ + eta * h_;
    const auto& d = dir->direction;
    if (d.zero) {
      sketch_.linear_update(Scalar(1.0 - eta), Scalar(0), d.left, d.right);
    } else {
      sketch_.cgm_update(d.left, d.right, eta);
    }
    if (observer_) observer_(StepEvent<Scalar>{t_, eta, d, h_, z_, sketch_});
    ++t_;
    return rec;
  }

  FactoredMatrix<Scalar> reconstruct() const {
    return spec_->tmpl == Template::psd ? sketch_.reconstruct_psd(spec_->rank)
                                        : sketch_.reconstruct(spec_->rank);
  }

  bool converged() const { return converged_; }
  int iteration() const { return t_; }
  double last_gap() const { return last_gap_; }
  const VecR& dual() const { return z_; }
  const Sketch<Scalar>& sketch() const { return sketch_; }
  const ProblemSpec<Op>& spec() const { return *spec_; }
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  static const ProblemSpec<Op>& validated(const ProblemSpec<Op>& spec) {
    spec.validate();
    return spec;
  }

  const ProblemSpec<Op>* spec_;
  Sketch<Scalar> sketch_;
  ScalarLease lease_;
  VecR z_, grad_, h_;
  int t_ = 0;
  double last_gap_ = std::numeric_limits<double>::infinity();
  bool converged_ = false;
  StepObserver<Scalar> observer_;
  std::chrono::steady_clock::time_point start_;
};

template <Field S>
struct SolveResult {
  FactoredMatrix<S> solution;
  std::vector<IterationRecord> trace;
  bool converged = false;  // gap <= eps reached; otherwise max_iters ran out
  int iterations = 0;
  double final_gap = 0.0;
  double final_objective = 0.0;
  VecR z;
};

/// Runs until gap <= eps or max_iters, then reconstructs the rank-r solution.
/// Running out of iterations is reported through `converged`, not thrown: the
/// partial reconstruction is still returned.
template <MeasurementOperator Op>
SolveResult<typename Op::Scalar> solve(const ProblemSpec<Op>& spec,
                                       const SolveOptions<typename Op::Scalar>& opts = {}) {
  using S = typename Op::Scalar;
  SketchyCgm<Op> solver(spec);
  if (opts.observer) solver.set_observer(opts.observer);
  SolveResult<S> out;
  while (!solver.converged() && solver.iteration() < spec.max_iters) {
    const int t = solver.iteration();
    const bool evaluate = opts.evaluator && opts.trace_every > 0 && t % opts.trace_every == 0;
    std::vector<std::pair<std::string, double>> metrics;
    if (evaluate) metrics = opts.evaluator(solver.reconstruct());
    IterationRecord rec = solver.step();
    rec.metrics = std::move(metrics);
    out.final_objective = rec.objective;
    out.trace.push_back(std::move(rec));
  }
  out.converged = solver.converged();
  out.iterations = solver.iteration();
  out.final_gap = solver.last_gap();
  out.z = solver.dual();
  if (!out.converged) out.final_objective = spec.loss.value(out.z);
  out.solution = solver.reconstruct();
  return out;
}

}  // namespace sketchycgm
