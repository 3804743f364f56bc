#pragma once

// Front end behind the `sketchycgm` tool: flat key=value configuration,
// problem assembly, artifact writing (trace.csv, U/S/V.csv, summary.json,
// bench.csv) and the storage / sketch statistical harnesses.
//
// Requires nlohmann/json.

#include <nlohmann/json.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sketchycgm/eval.hpp"
#include "sketchycgm/probgen.hpp"
#include "sketchycgm/reference.hpp"
#include "sketchycgm/solver.hpp"

namespace sketchycgm::cli {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

class RunConfig {
 public:
  std::string subcommand = "solve";

  /// Reads "key = value" lines; '#' starts a comment, blank lines are skipped.
  static RunConfig from_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) throw ParseError(path.filename().string() + ": expected key=value", lineno);
      const std::string key = trim(trimmed.substr(0, eq));
      if (key.empty()) throw ParseError(path.filename().string() + ": empty key", lineno);
      cfg.set(key, trim(trimmed.substr(eq + 1)));
    }
    return cfg;
  }

  /// Keys are normalized so "max-iters" and "max_iters" are the same key.
  void set(const std::string& key, const std::string& value) { kv_[normalize(key)] = value; }
  void merge(const RunConfig& other) {
    for (const auto& [k, v] : other.kv_) kv_[k] = v;
  }
  bool has(const std::string& key) const { return kv_.count(normalize(key)) > 0; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string get(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(normalize(key));
    return it == kv_.end() ? fallback : it->second;
  }
  std::string require(const std::string& key) const {
    const auto it = kv_.find(normalize(key));
    if (it == kv_.end()) throw InvalidArgument("missing required config key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? to_double(key, get(key, "")) : fallback;
  }
  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key, "");
    try {
      std::size_t used = 0;
      const long long out = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw InvalidArgument("config key '" + key + "' expects an integer, got '" + v + "'");
    }
  }
  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key, "");
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InvalidArgument("config key '" + key + "' expects a boolean, got '" + v + "'");
  }
  /// Comma-separated list of integers.
  std::vector<Index> get_list(const std::string& key, std::vector<Index> fallback) const {
    if (!has(key)) return fallback;
    std::vector<Index> out;
    std::stringstream ss(get(key, ""));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      if (cell.empty()) continue;
      try {
        out.push_back(static_cast<Index>(std::stoll(cell)));
      } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "' expects a list of integers");
      }
    }
    return out;
  }

  /// Cross-key consistency: psd template needs a square problem, poisson
  /// variant needs poisson loss.
  void validate() const {
    static const std::vector<std::string> subcommands{"solve", "sketch-test", "bench-memory", "gen"};
    if (std::find(subcommands.begin(), subcommands.end(), subcommand) == subcommands.end())
      throw InvalidArgument("unknown subcommand '" + subcommand + "'");
    if (has("template")) parse_template(get("template", ""));
    if (has("variant")) parse_variant(get("variant", ""));
    if (has("loss")) parse_loss_kind(get("loss", ""));
    const std::string problem = get("problem", "phase");
    if (subcommand == "solve" || subcommand == "gen") {
      static const std::vector<std::string> problems{"scalar", "phase", "ptychography", "completion", "triples"};
      if (std::find(problems.begin(), problems.end(), problem) == problems.end())
        throw InvalidArgument("unknown problem '" + problem + "'");
      const bool phase_like = problem == "phase" || problem == "ptychography";
      const Template tmpl = parse_template(get("template", phase_like ? "psd" : "schatten1"));
      if (tmpl == Template::psd && !phase_like)
        throw InvalidArgument("the psd template needs a square Hermitian problem (phase or ptychography)");
      if (tmpl == Template::schatten1 && phase_like)
        throw InvalidArgument("phase problems use the psd template");
      if (parse_variant(get("variant", "standard")) == Variant::poisson &&
          parse_loss_kind(get("loss", "gauss")) != LossKind::poisson)
        throw InvalidArgument("the poisson variant needs loss=poisson");
    }
    if (has("alpha") && !(get_double("alpha", 0.0) > 0.0)) throw InvalidArgument("alpha must be positive");
    if (has("rank") && get_int("rank", 1) < 1) throw InvalidArgument("rank must be >= 1");
    if (has("eps") && !(get_double("eps", 1.0) > 0.0)) throw InvalidArgument("eps must be positive");
    if (has("max_iters") && get_int("max_iters", 1) < 1) throw InvalidArgument("max_iters must be >= 1");
  }

  static std::string normalize(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw InvalidArgument("config key '" + key + "' expects a number, got '" + v + "'");
    }
  }

  std::map<std::string, std::string> kv_;
};

// ---------------------------------------------------------------------------
// Error reporting

inline json error_json(const std::exception& e) {
  json err{{"message", e.what()}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
    err["kind"] = pe->kind();
    err["line"] = pe->line();
  } else if (const auto* se = dynamic_cast<const Error*>(&e)) {
    err["kind"] = se->kind();
  } else {
    err["kind"] = "InternalError";
  }
  return json{{"error", err}};
}

namespace detail {

using sketchycgm::detail::require;
using sketchycgm::detail::require_dims;

inline std::filesystem::path out_dir(const RunConfig& cfg) {
  std::filesystem::path dir = cfg.get("out", "out");
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

inline json metrics_json(const std::vector<std::pair<std::string, double>>& metrics) {
  json m = json::object();
  for (const auto& [k, v] : metrics) m[k] = std::isfinite(v) ? json(v) : json(nullptr);
  return m;
}

/// ||Xhat - Xtrue||_F / ||Xtrue||_F for two factored matrices, via small
/// Gram products only.
template <Field S>
double factored_relative_error(const FactoredMatrix<S>& a, const FactoredMatrix<S>& b) {
  auto gram = [](const FactoredMatrix<S>& x, const FactoredMatrix<S>& y) {
    const Mat<S> left = x.U.adjoint() * y.U;
    const Mat<S> right = y.V.adjoint() * x.V;
    const Mat<S> inner = x.sigma.template cast<S>().asDiagonal() * left *
                         y.sigma.template cast<S>().asDiagonal() * right;
    return real_of(inner.trace());
  };
  const double bb = gram(b, b);
  if (bb <= 0.0) throw ZeroTruth("relative error: reference matrix is zero");
  const double sq = std::max(0.0, gram(a, a) + bb - 2.0 * gram(a, b));
  return std::sqrt(sq / bb);
}

template <Field S>
FactoredMatrix<S> make_factored(const Vec<S>& x) {
  FactoredMatrix<S> f;
  const double nx = x.norm();
  f.U = Mat<S>(x / nx);
  f.sigma = VecR::Constant(1, nx * nx);
  f.V = f.U;
  return f;
}

struct SolverKnobs {
  Index rank;
  double eps;
  int max_iters;
  std::uint64_t seed;
  SpectralConfig spectral;
};

inline SolverKnobs solver_knobs(const RunConfig& cfg, Index rank, double eps, int max_iters) {
  SolverKnobs k{static_cast<Index>(cfg.get_int("rank", rank)), cfg.get_double("eps", eps),
                static_cast<int>(cfg.get_int("max_iters", max_iters)),
                static_cast<std::uint64_t>(cfg.get_int("seed", 0)), SpectralConfig{}};
  k.spectral.tol = cfg.get_double("spectral_tol", k.spectral.tol);
  k.spectral.max_iters = static_cast<int>(cfg.get_int("spectral_max_iters", k.spectral.max_iters));
  k.spectral.krylov_dim = static_cast<Index>(cfg.get_int("krylov_dim", k.spectral.krylov_dim));
  return k;
}

template <MeasurementOperator Op>
void apply_knobs(ProblemSpec<Op>& spec, const SolverKnobs& k) {
  spec.rank = k.rank;
  spec.eps = k.eps;
  spec.max_iters = k.max_iters;
  spec.seed = k.seed;
  spec.spectral = k.spectral;
}

/// Shared tail of every `solve` run: iterate, reconstruct, write artifacts.
template <MeasurementOperator Op>
json finish_solve(const ProblemSpec<Op>& spec, const Evaluator<typename Op::Scalar>& evaluator,
                  const RunConfig& cfg, std::int64_t baseline, std::ostream& log) {
  SolveOptions<typename Op::Scalar> opts;
  opts.evaluator = evaluator;
  opts.trace_every = static_cast<int>(cfg.get_int("trace_every", 0));
  const auto result = solve(spec, opts);
  const std::int64_t peak = AllocationLedger::global().peak_total() - baseline;

  const auto dir = out_dir(cfg);
  {
    std::ofstream os(dir / "trace.csv");
    if (!os) throw IoError("cannot write trace.csv");
    write_trace_csv(os, result.trace);
  }
  write_factored(dir, result.solution);

  std::vector<std::pair<std::string, double>> metrics;
  if (evaluator) metrics = evaluator(result.solution);
  json summary{{"gap", result.final_gap},
               {"objective", result.final_objective},
               {"iters", result.iterations},
               {"converged", result.converged},
               {"alpha", spec.alpha},
               {"peak_scalars", peak},
               {"wall_ms", result.trace.empty() ? 0.0 : result.trace.back().wall_ms},
               {"metrics", metrics_json(metrics)}};
  write_json(dir / "summary.json", summary);
  log << "iters=" << result.iterations << " gap=" << result.final_gap
      << " objective=" << result.final_objective << (result.converged ? "" : " (max_iters reached)") << '\n';
  for (const auto& [k, v] : metrics) log << k << '=' << v << '\n';
  return summary;
}

inline SyntheticPhaseSpec phase_spec_from(const RunConfig& cfg) {
  SyntheticPhaseSpec ps;
  ps.n = static_cast<Index>(cfg.get_int("n", 64));
  ps.views = static_cast<Index>(cfg.get_int("views", 10));
  ps.noise = parse_noise_kind(cfg.get("noise", "none"));
  ps.snr_db = cfg.get_double("snr_db", 20.0);
  ps.loss = parse_loss_kind(cfg.get("loss", "gauss"));
  ps.variant = parse_variant(cfg.get("variant", "standard"));
  ps.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  return ps;
}

inline SyntheticCompletionSpec completion_spec_from(const RunConfig& cfg) {
  SyntheticCompletionSpec cs;
  cs.m = static_cast<Index>(cfg.get_int("m", 100));
  cs.n = static_cast<Index>(cfg.get_int("n", 80));
  cs.true_rank = static_cast<Index>(cfg.get_int("true_rank", 3));
  cs.observed = cfg.get_double("observed", 0.3);
  cs.train_split = cfg.get_double("train_split", 0.8);
  cs.noise_std = cfg.get_double("noise_std", 0.0);
  cs.loss = parse_loss_kind(cfg.get("loss", "gauss"));
  cs.alpha = cfg.get_double("alpha", 0.0);
  cs.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  return cs;
}

inline double resolve_alpha(const RunConfig& cfg, const std::string& default_mode, const VecR& b,
                            double truth_alpha, double energy_alpha) {
  if (cfg.has("alpha")) return cfg.get_double("alpha", 0.0);
  const std::string mode = cfg.get("alpha_mode", default_mode);
  if (mode == "mean-b" || mode == "mean_b") return select_alpha_phase(b);
  if (mode == "truth" && truth_alpha > 0.0) return truth_alpha;
  if (mode == "energy" && energy_alpha > 0.0) return energy_alpha;
  throw InvalidArgument("alpha_mode '" + mode + "' is not available for this problem; set alpha");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// solve

inline json run_solve(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  auto& ledger = AllocationLedger::global();
  const std::int64_t baseline = ledger.live_total();
  ledger.reset_peak();
  const std::string problem = cfg.get("problem", "phase");

  if (problem == "scalar") {
    const double b = cfg.get_double("b", 0.5);
    EntrySampling<double> op(1, 1, {Entry{0, 0}});
    ProblemSpec<EntrySampling<double>> spec{std::move(op), Loss(LossKind::gauss, VecR::Constant(1, b)),
                                            cfg.get_double("alpha", 1.0)};
    detail::apply_knobs(spec, detail::solver_knobs(cfg, 1, 1e-3, 100000));
    Evaluator<double> eval = [b](const FactoredMatrix<double>& x) {
      return std::vector<std::pair<std::string, double>>{{"x", x.entry(0, 0)}, {"abs_error", std::abs(x.entry(0, 0) - b)}};
    };
    return detail::finish_solve(spec, eval, cfg, baseline, log);
  }

  if (problem == "phase") {
    SyntheticPhaseSpec ps = detail::phase_spec_from(cfg);
    PhaseProblem pp = gen_phase_problem(ps);
    pp.spec.alpha = detail::resolve_alpha(cfg, "mean-b", pp.spec.loss.data(), pp.truth.squaredNorm(), 0.0);
    detail::apply_knobs(pp.spec, detail::solver_knobs(cfg, 1, 1e-6, 300));
    const VecC truth = pp.truth;
    Evaluator<cplx> eval = [truth](const FactoredMatrix<cplx>& x) {
      return std::vector<std::pair<std::string, double>>{
          {"phase_aligned_error", phase_aligned_error<cplx>(x.top_vector(), truth)}};
    };
    return detail::finish_solve(pp.spec, eval, cfg, baseline, log);
  }

  if (problem == "ptychography") {
    const Index n = static_cast<Index>(cfg.get_int("n", 64));
    const Index s = static_cast<Index>(cfg.get_int("views", 8));
    const Index q = static_cast<Index>(cfg.get_int("q", std::min<Index>(n, 2 * ((n + s - 1) / s))));
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    PtychographyBandpass op = build_ptychography(n, q, s);
    auto rng = sketchycgm::detail::make_rng(seed, 0x7A11u);
    const VecC truth = sketchycgm::detail::random_normal_vec<cplx>(n, rng);
    const VecR clean = psd_measure(op, MatC(truth), VecR::Ones(1));
    auto noise_rng = sketchycgm::detail::make_rng(seed, 0x0015Eu);
    VecR b = sketchycgm::detail::add_noise(clean, parse_noise_kind(cfg.get("noise", "none")),
                                           cfg.get_double("snr_db", 20.0), noise_rng);
    // Unitary windows: sum(b) = (s q / n) ||x||^2 when coverage is uniform.
    const double energy = b.sum() * static_cast<double>(n) / static_cast<double>(s * q);
    const double alpha = detail::resolve_alpha(cfg, "energy", b, truth.squaredNorm(), energy);
    ProblemSpec<PtychographyBandpass> spec{std::move(op), Loss(parse_loss_kind(cfg.get("loss", "gauss")), std::move(b)),
                                           alpha};
    spec.tmpl = Template::psd;
    spec.variant = parse_variant(cfg.get("variant", "standard"));
    detail::apply_knobs(spec, detail::solver_knobs(cfg, 1, 1e-6, 300));
    Evaluator<cplx> eval = [truth](const FactoredMatrix<cplx>& x) {
      return std::vector<std::pair<std::string, double>>{
          {"phase_aligned_error", phase_aligned_error<cplx>(x.top_vector(), truth)}};
    };
    return detail::finish_solve(spec, eval, cfg, baseline, log);
  }

  if (problem == "completion") {
    SyntheticCompletionSpec cs = detail::completion_spec_from(cfg);
    CompletionProblem cp = gen_completion_problem(cs);
    cp.spec.alpha = detail::resolve_alpha(cfg, "truth", cp.spec.loss.data(), cp.truth.sigma.sum(), 0.0);
    detail::apply_knobs(cp.spec, detail::solver_knobs(cfg, cs.true_rank, 1e-6, 1000));
    const auto truth = cp.truth;
    const auto evalspec = cp.eval;
    Evaluator<double> eval = [truth, evalspec](const FactoredMatrix<double>& x) {
      std::vector<std::pair<std::string, double>> out{
          {"relative_error", detail::factored_relative_error(x, truth)}};
      if (!evalspec.entries.empty()) out.emplace_back("test_error", test_error(x, evalspec));
      return out;
    };
    return detail::finish_solve(cp.spec, eval, cfg, baseline, log);
  }

  // triples
  const TripleData train = load_triples(cfg.require("train"));
  const LossKind kind = parse_loss_kind(cfg.get("loss", "gauss"));
  detail::require(kind != LossKind::poisson, "triples: poisson loss is not supported for rating data");
  const VecR& data = kind == LossKind::logistic ? train.labels : train.values;
  ProblemSpec<EntrySampling<double>> spec{EntrySampling<double>(train.spec), Loss::averaged(kind, data),
                                          std::stod(cfg.require("alpha"))};
  detail::apply_knobs(spec, detail::solver_knobs(cfg, 10, 1e-6, 1000));
  Evaluator<double> eval;
  if (cfg.has("test")) {
    std::size_t dropped = 0;
    const TripleData test = load_test_triples(cfg.require("test"), train, &dropped);
    if (dropped > 0) log << "test: skipped " << dropped << " pairs outside the training index space\n";
    EvalSpec es{test.spec.entries, kind == LossKind::logistic ? test.labels : test.values, kind, 1.0};
    if (!es.entries.empty())
      eval = [es](const FactoredMatrix<double>& x) {
        return std::vector<std::pair<std::string, double>>{{"test_error", test_error(x, es)}};
      };
  }
  return detail::finish_solve(spec, eval, cfg, baseline, log);
}

/// Runs `solve` once per radius in the comma-separated key "alphas", each
/// into out/alpha_<k>/, and writes out/sweep.csv.
inline json run_alpha_sweep(const RunConfig& cfg, std::ostream& log) {
  std::vector<double> alphas;
  {
    std::stringstream ss(cfg.require("alphas"));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::erase_if(cell, [](char c) { return c == ' ' || c == '\t'; });
      if (cell.empty()) continue;
      RunConfig probe;
      probe.set("alpha", cell);
      alphas.push_back(probe.get_double("alpha", 0.0));
    }
  }
  detail::require(!alphas.empty(), "alphas: need at least one radius");
  const auto dir = detail::out_dir(cfg);
  json rows = json::array();
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw IoError("cannot write sweep.csv");
  csv << std::setprecision(17) << "alpha,iters,gap,objective,test_error\n";
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    RunConfig one = cfg;
    std::ostringstream a;
    a << std::setprecision(17) << alphas[k];
    one.set("alpha", a.str());
    one.set("out", (dir / ("alpha_" + std::to_string(k))).string());
    log << "alpha=" << alphas[k] << '\n';
    json summary = run_solve(one, log);
    const auto& metrics = summary["metrics"];
    const double te = metrics.contains("test_error") && metrics["test_error"].is_number()
                          ? metrics["test_error"].get<double>()
                          : std::numeric_limits<double>::quiet_NaN();
    csv << alphas[k] << ',' << summary["iters"].get<int>() << ',' << summary["gap"].get<double>() << ','
        << summary["objective"].get<double>() << ',' << te << '\n';
    summary["alpha"] = alphas[k];
    rows.push_back(std::move(summary));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// bench-memory

struct BenchRow {
  Index n = 0;
  std::int64_t sketchy_peak = 0;
  std::optional<std::int64_t> dense_peak;  // empty: dense guard tripped
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double max_relative_residual = 0.0;
};

/// Least-squares fit y = a + b x and the largest |y - fit| / y.
inline LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require_dims(x.size() == y.size() && x.size() >= 2, "fit_linear: need >= 2 paired points");
  MatR a(static_cast<Index>(x.size()), 2);
  VecR rhs(static_cast<Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(static_cast<Index>(i), 0) = 1.0;
    a(static_cast<Index>(i), 1) = x[i];
    rhs(static_cast<Index>(i)) = y[i];
  }
  const VecR coef = a.colPivHouseholderQr().solve(rhs);
  LinearFit fit{coef(0), coef(1), 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::abs(y[i] - (fit.intercept + fit.slope * x[i])) / std::abs(y[i]);
    fit.max_relative_residual = std::max(fit.max_relative_residual, r);
  }
  return fit;
}

/// Peak live scalars of a short SketchyCGM run and, where the dense guard
/// allows, a dense CGM run on the same noiseless phase problem.
inline BenchRow bench_memory_point(Index n, Index rank, Index views, int iters, std::uint64_t seed) {
  auto& ledger = AllocationLedger::global();
  BenchRow row{n, 0, std::nullopt};
  SyntheticPhaseSpec ps;
  ps.n = n;
  ps.views = views;
  ps.rank = rank;
  ps.max_iters = iters;
  ps.eps = 1e-300;
  ps.seed = seed;
  {
    const std::int64_t baseline = ledger.live_total();
    ledger.reset_peak();
    const PhaseProblem pp = gen_phase_problem(ps);
    (void)solve(pp.spec);
    row.sketchy_peak = ledger.peak_total() - baseline;
  }
  if (static_cast<double>(n) * static_cast<double>(n) <= kDenseLimit) {
    const std::int64_t baseline = ledger.live_total();
    ledger.reset_peak();
    const PhaseProblem pp = gen_phase_problem(ps);
    (void)cgm_dense_solve(pp.spec, iters);
    row.dense_peak = ledger.peak_total() - baseline;
  }
  return row;
}

inline std::vector<BenchRow> bench_memory(const std::vector<Index>& ns, Index rank, Index views, int iters,
                                          std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (const Index n : ns) rows.push_back(bench_memory_point(n, rank, views, iters, seed));
  return rows;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "n,sketchycgm_peak_scalars,dense_cgm_peak_scalars\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.sketchy_peak << ',';
    if (r.dense_peak) {
      os << *r.dense_peak;
    } else {
      os << "oom-guard";
    }
    os << '\n';
  }
}

inline json run_bench_memory(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto ns = cfg.get_list("ns", {256, 512, 1024, 2048, 4096, 8192});
  detail::require(ns.size() >= 2, "bench-memory: need at least two n values");
  const auto rows = bench_memory(ns, static_cast<Index>(cfg.get_int("rank", 1)),
                                 static_cast<Index>(cfg.get_int("views", 10)),
                                 static_cast<int>(cfg.get_int("bench_iters", 10)),
                                 static_cast<std::uint64_t>(cfg.get_int("seed", 0)));
  const auto dir = detail::out_dir(cfg);
  {
    std::ofstream os(dir / "bench.csv");
    if (!os) throw IoError("cannot write bench.csv");
    write_bench_csv(os, rows);
  }
  write_bench_csv(log, rows);

  std::vector<double> x, y;
  json ratios = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.push_back(static_cast<double>(rows[i].n));
    y.push_back(static_cast<double>(rows[i].sketchy_peak));
    if (i > 0 && rows[i - 1].dense_peak && rows[i].dense_peak)
      ratios.push_back(static_cast<double>(*rows[i].dense_peak) / static_cast<double>(*rows[i - 1].dense_peak));
  }
  const LinearFit fit = fit_linear(x, y);
  json summary{{"sketchycgm_fit", {{"intercept", fit.intercept}, {"slope", fit.slope},
                                   {"max_relative_residual", fit.max_relative_residual}}},
               {"dense_ratios", ratios}};
  detail::write_json(dir / "bench_summary.json", summary);
  log << "sketchycgm peak ~ " << fit.intercept << " + " << fit.slope << " n (max rel. residual "
      << fit.max_relative_residual << ")\n";
  return summary;
}

// ---------------------------------------------------------------------------
// sketch-test

struct SketchSuiteReport {
  std::string name;
  int trials = 0;
  double statistic = 0.0;  // exactness: worst relative error; tail: mean error / tail norm
  double threshold = 0.0;
  bool passed = false;
};

/// Rank-r matrices must be recovered exactly (relative error <= 1e-8).
inline SketchSuiteReport sketch_exactness_suite(Index m, Index n, const std::vector<Index>& ranks, int trials,
                                                std::uint64_t seed) {
  SketchSuiteReport rep{"exactness", 0, 0.0, 1e-8, false};
  for (const Index r : ranks) {
    for (int trial = 0; trial < trials; ++trial) {
      const std::uint64_t s = seed + 1000003ull * static_cast<std::uint64_t>(r) + static_cast<std::uint64_t>(trial);
      auto rng = sketchycgm::detail::make_rng(s, 0x5EEDu);
      const MatR a = sketchycgm::detail::random_normal<double>(m, r, rng);
      const MatR b = sketchycgm::detail::random_normal<double>(n, r, rng);
      Sketch<double> sk(m, n, r, s);
      for (Index j = 0; j < r; ++j) sk.linear_update(1.0, 1.0, VecR(a.col(j)), VecR(b.col(j)));
      const MatR x = a * b.transpose();
      const double err = (sk.reconstruct(r).dense() - x).norm() / x.norm();
      rep.statistic = std::max(rep.statistic, err);
      ++rep.trials;
    }
  }
  rep.passed = rep.statistic <= rep.threshold;
  return rep;
}

/// Rank-r head plus a full-rank tail; the mean reconstruction error over
/// trials is compared with 3 sqrt(2) ||X - [X]_r||_F (10% slack).
inline SketchSuiteReport sketch_tail_suite(Index m, Index n, Index r, double tail, int trials, std::uint64_t seed) {
  SketchSuiteReport rep{"tail_bound", trials, 0.0, 3.0 * std::sqrt(2.0) * 1.10, false};
  double ratio_sum = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(trial);
    auto rng = sketchycgm::detail::make_rng(s, 0x7A1Eu);
    const MatR a = sketchycgm::detail::random_normal<double>(m, r, rng);
    const MatR b = sketchycgm::detail::random_normal<double>(n, r, rng);
    MatR noise = sketchycgm::detail::random_normal<double>(m, n, rng);
    const MatR x = a * b.transpose() + (tail / noise.norm()) * noise;
    Eigen::BDCSVD<MatR> svd(x);
    const double best = std::sqrt(svd.singularValues().tail(svd.singularValues().size() - r).squaredNorm());
    Sketch<double> sk(m, n, r, s);
    sk.linear_update(0.0, 1.0, x);
    ratio_sum += (sk.reconstruct(r).dense() - x).norm() / best;
  }
  rep.statistic = ratio_sum / trials;
  rep.passed = rep.statistic <= rep.threshold;
  return rep;
}

inline json run_sketch_test(const RunConfig& cfg, std::ostream& log, bool* all_passed = nullptr) {
  cfg.validate();
  const Index m = static_cast<Index>(cfg.get_int("m", 200));
  const Index n = static_cast<Index>(cfg.get_int("n", 150));
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  std::vector<SketchSuiteReport> reports{
      sketch_exactness_suite(m, n, cfg.get_list("ranks", {1, 3, 5}), static_cast<int>(cfg.get_int("trials", 50)), seed),
      sketch_tail_suite(m, n, static_cast<Index>(cfg.get_int("tail_rank", 5)), cfg.get_double("tail", 1e-2),
                        static_cast<int>(cfg.get_int("tail_trials", 100)), seed)};
  json out = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name << " trials=" << r.trials << " statistic=" << r.statistic
        << " threshold=" << r.threshold << '\n';
    out.push_back({{"name", r.name}, {"trials", r.trials}, {"statistic", r.statistic},
                   {"threshold", r.threshold}, {"passed", r.passed}});
    ok = ok && r.passed;
  }
  if (cfg.has("out")) detail::write_json(detail::out_dir(cfg) / "sketch_report.json", out);
  if (all_passed) *all_passed = ok;
  return out;
}

// ---------------------------------------------------------------------------
// gen

inline json run_gen(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto dir = detail::out_dir(cfg);
  const std::string problem = cfg.get("problem", "completion");
  if (problem == "completion") {
    const CompletionProblem cp = gen_completion_problem(detail::completion_spec_from(cfg));
    write_triples(dir / "train.txt", cp.spec.op.entries(), cp.spec.loss.data());
    if (!cp.eval.entries.empty()) write_triples(dir / "test.txt", cp.eval.entries, cp.eval.values);
    write_factored(dir / "truth", cp.truth);
    log << "wrote " << cp.spec.op.measurements() << " training and " << cp.eval.entries.size()
        << " test triples to " << dir.string() << '\n';
    return json{{"train", cp.spec.op.measurements()}, {"test", cp.eval.entries.size()},
                {"alpha", cp.spec.alpha}};
  }
  if (problem == "phase") {
    const PhaseProblem pp = gen_phase_problem(detail::phase_spec_from(cfg));
    sketchycgm::detail::write_matrix_csv<double>(dir / "measurements.csv", MatR(pp.spec.loss.data()));
    sketchycgm::detail::write_matrix_csv<cplx>(dir / "truth.csv", MatC(pp.truth));
    sketchycgm::detail::write_matrix_csv<cplx>(dir / "diagonals.csv", pp.spec.op.diagonals());
    log << "wrote " << pp.spec.op.measurements() << " measurements to " << dir.string() << '\n';
    return json{{"measurements", pp.spec.op.measurements()}, {"alpha", pp.spec.alpha},
                {"snr_db", realized_snr_db(pp.clean, pp.spec.loss.data())}};
  }
  throw InvalidArgument("gen supports problem=completion or problem=phase");
}

}  // namespace sketchycgm::cli
