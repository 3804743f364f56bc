#pragma once

// Synthetic problem generators (phase retrieval, matrix completion) and the
// "i j value" triple file format used for rating data.

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sketchycgm/eval.hpp"
#include "sketchycgm/solver.hpp"

namespace sketchycgm {

enum class NoiseKind { none, gaussian, poisson };

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::poisson: return "poisson";
  }
  return "?";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "none") return NoiseKind::none;
  if (s == "gaussian" || s == "gauss") return NoiseKind::gaussian;
  if (s == "poisson") return NoiseKind::poisson;
  throw InvalidArgument("unknown noise kind '" + std::string(s) + "'");
}

/// 10 log10(||clean||^2 / ||noisy - clean||^2).
inline double realized_snr_db(const VecR& clean, const VecR& noisy) {
  detail::require_dims(clean.size() == noisy.size(), "snr: length mismatch");
  const double noise = (noisy - clean).squaredNorm();
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(clean.squaredNorm() / noise);
}

namespace detail {

/// Adds noise at the requested SNR (power ratio, dB). Poisson noise draws
/// b ~ Poisson(c clean) / c with the photon scale c chosen so the expected
/// noise power sum(clean)/c hits the target.
inline VecR add_noise(const VecR& clean, NoiseKind kind, double snr_db, std::mt19937_64& rng) {
  if (kind == NoiseKind::none) return clean;
  detail::require(snr_db > 0.0 && std::isfinite(snr_db), "noise: SNR in dB must be positive");
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double power = clean.squaredNorm();
  detail::require(power > 0.0, "noise: clean signal is zero");
  VecR out(clean.size());
  if (kind == NoiseKind::gaussian) {
    const double sigma = std::sqrt(power / (snr * static_cast<double>(clean.size())));
    std::normal_distribution<double> g(0.0, sigma);
    for (Index i = 0; i < clean.size(); ++i) out(i) = clean(i) + g(rng);
    return out;
  }
  detail::require(clean.minCoeff() >= 0.0, "poisson noise: clean measurements must be nonnegative");
  const double c = snr * clean.sum() / power;
  for (Index i = 0; i < clean.size(); ++i) {
    std::poisson_distribution<long long> p(c * clean(i));
    out(i) = clean(i) > 0.0 ? static_cast<double>(p(rng)) / c : 0.0;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Phase retrieval

struct SyntheticPhaseSpec {
  Index n = 64;
  Index views = 10;
  NoiseKind noise = NoiseKind::none;
  double snr_db = 20.0;
  LossKind loss = LossKind::gauss;
  Variant variant = Variant::standard;
  Index rank = 1;
  double eps = 1e-6;
  int max_iters = 300;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(n >= 1 && views >= 1, "phase spec: n and views must be >= 1");
    if (noise != NoiseKind::none) detail::require(snr_db > 0.0, "phase spec: SNR must be positive");
  }
};

/// alpha = mean(b). With an unnormalized DFT this estimates tr(x x^*) = ||x||^2.
inline double select_alpha_phase(const VecR& b) {
  detail::require(b.size() >= 1, "select_alpha_phase: empty measurements");
  const double a = b.mean();
  if (!(a > 0.0)) throw DomainError("select_alpha_phase: measurements average to a nonpositive value");
  return a;
}

struct PhaseProblem {
  ProblemSpec<CodedDiffraction> spec;
  VecC truth;
  VecR clean;  // noiseless measurements |A x|^2
};

inline PhaseProblem gen_phase_problem(const SyntheticPhaseSpec& ps) {
  ps.validate();
  CodedDiffraction op = build_coded_diffraction(ps.n, ps.views, ps.seed, DftScaling::unnormalized);
  auto rng = detail::make_rng(ps.seed, 0x7A11u);
  VecC x = detail::random_normal_vec<cplx>(ps.n, rng);
  const VecR clean = psd_measure(op, MatC(x), VecR::Ones(1));
  auto noise_rng = detail::make_rng(ps.seed, 0x0015Eu);
  VecR b = detail::add_noise(clean, ps.noise, ps.snr_db, noise_rng);
  const double alpha = select_alpha_phase(b);
  ProblemSpec<CodedDiffraction> spec{std::move(op), Loss(ps.loss, std::move(b)), alpha};
  spec.tmpl = Template::psd;
  spec.rank = ps.rank;
  spec.eps = ps.eps;
  spec.max_iters = ps.max_iters;
  spec.variant = ps.variant;
  spec.seed = ps.seed;
  return PhaseProblem{std::move(spec), std::move(x), clean};
}

// ---------------------------------------------------------------------------
// Matrix completion

struct SyntheticCompletionSpec {
  Index m = 100;
  Index n = 80;
  Index true_rank = 3;
  double observed = 0.3;     // fraction p of entries observed
  double train_split = 0.8;  // share of the observed entries used for training
  double noise_std = 0.0;
  LossKind loss = LossKind::gauss;
  double alpha = 0.0;        // 0 selects ||X_truth||_S1
  Index rank = 3;
  double eps = 1e-6;
  int max_iters = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(m >= 1 && n >= 1, "completion spec: dimensions must be >= 1");
    detail::require(true_rank >= 1 && true_rank <= std::min(m, n),
                    "completion spec: true rank must lie in [1, min(m, n)]");
    detail::require(observed > 0.0 && observed <= 1.0, "completion spec: observed fraction must lie in (0, 1]");
    detail::require(train_split > 0.0 && train_split <= 1.0, "completion spec: train split must lie in (0, 1]");
    detail::require(noise_std >= 0.0, "completion spec: noise level must be >= 0");
    detail::require(alpha >= 0.0, "completion spec: alpha must be >= 0");
    detail::require(loss != LossKind::poisson, "completion spec: poisson loss is for phase retrieval");
  }
};

/// Thin SVD of L R^T without forming the m x n product.
inline FactoredMatrix<double> factor_product(const MatR& left, const MatR& right) {
  detail::require_dims(left.cols() == right.cols(), "factor_product: inner dimensions differ");
  Eigen::HouseholderQR<MatR> ql(left), qr(right);
  const Index k = left.cols();
  const Index kl = std::min(left.rows(), k), kr = std::min(right.rows(), k);
  const MatR rl = ql.matrixQR().topRows(kl).triangularView<Eigen::Upper>();
  const MatR rr = qr.matrixQR().topRows(kr).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<MatR> svd(rl * rr.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  FactoredMatrix<double> out;
  out.U = ql.householderQ() * MatR::Identity(left.rows(), kl) * svd.matrixU();
  out.sigma = svd.singularValues();
  out.V = qr.householderQ() * MatR::Identity(right.rows(), kr) * svd.matrixV();
  return out;
}

struct CompletionProblem {
  ProblemSpec<EntrySampling<double>> spec;
  FactoredMatrix<double> truth;
  EvalSpec eval;
};

inline CompletionProblem gen_completion_problem(const SyntheticCompletionSpec& cs) {
  cs.validate();
  auto rng = detail::make_rng(cs.seed, 0xC0u);
  const MatR left = detail::random_normal<double>(cs.m, cs.true_rank, rng);
  const MatR right = detail::random_normal<double>(cs.n, cs.true_rank, rng);
  FactoredMatrix<double> truth = factor_product(left, right);

  // Uniform sample of round(p m n) distinct cells, then a train/test split.
  const std::int64_t total = static_cast<std::int64_t>(cs.m) * cs.n;
  const auto count = std::max<std::int64_t>(1, std::llround(cs.observed * static_cast<double>(total)));
  auto pick_rng = detail::make_rng(cs.seed, 0xC1u);
  std::vector<std::int64_t> cells;
  if (count == total) {
    cells.resize(static_cast<std::size_t>(total));
    std::iota(cells.begin(), cells.end(), std::int64_t{0});
  } else {
    std::set<std::int64_t> chosen;
    std::uniform_int_distribution<std::int64_t> cell(0, total - 1);
    while (static_cast<std::int64_t>(chosen.size()) < count) chosen.insert(cell(pick_rng));
    cells.assign(chosen.begin(), chosen.end());
  }
  std::shuffle(cells.begin(), cells.end(), pick_rng);
  const auto n_train = std::clamp<std::int64_t>(
      std::llround(cs.train_split * static_cast<double>(count)), 1, count);

  auto noise_rng = detail::make_rng(cs.seed, 0xC2u);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto observe = [&](std::int64_t c, Entry& e) {
    e = Entry{static_cast<Index>(c / cs.n), static_cast<Index>(c % cs.n)};
    double v = truth.entry(e.row, e.col);
    if (cs.noise_std > 0.0) v += cs.noise_std * noise(noise_rng);
    if (cs.loss == LossKind::logistic) v = v > 0.0 ? 1.0 : -1.0;
    return v;
  };

  std::vector<Entry> train(static_cast<std::size_t>(n_train));
  VecR b(n_train);
  for (std::int64_t k = 0; k < n_train; ++k) b(k) = observe(cells[k], train[k]);
  EvalSpec eval;
  eval.kind = cs.loss;
  eval.entries.resize(static_cast<std::size_t>(count - n_train));
  eval.values.resize(count - n_train);
  for (std::int64_t k = n_train; k < count; ++k)
    eval.values(k - n_train) = observe(cells[k], eval.entries[k - n_train]);

  const double alpha = cs.alpha > 0.0 ? cs.alpha : truth.sigma.sum();
  ProblemSpec<EntrySampling<double>> spec{EntrySampling<double>(cs.m, cs.n, std::move(train)),
                                          Loss::averaged(cs.loss, std::move(b)), alpha};
  spec.tmpl = Template::schatten1;
  spec.rank = cs.rank;
  spec.eps = cs.eps;
  spec.max_iters = cs.max_iters;
  spec.seed = cs.seed;
  return CompletionProblem{std::move(spec), std::move(truth), std::move(eval)};
}

// ---------------------------------------------------------------------------
// Triple files: one "i j value" per line, 1-indexed, whitespace separated.
// Extra trailing columns (e.g. timestamps) are ignored.

struct Triple {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

struct TripleData {
  EntrySamplingSpec spec;  // compacted, 0-indexed
  VecR values;
  VecR labels;  // values > 3.5 -> +1, otherwise -1
  std::vector<Index> row_ids;  // compacted row -> original 1-indexed id
  std::vector<Index> col_ids;
};

inline double binarize_rating(double v) { return v > 3.5 ? 1.0 : -1.0; }

/// Parses triples and keeps the original 1-indexed ids; no compaction.
inline std::vector<Triple> read_triples(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<Triple> out;
  std::set<std::pair<Index, Index>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::string si, sj, sv;
    if (!(ss >> si >> sj >> sv)) throw ParseError(path.filename().string() + ": expected 'i j value'", lineno);
    Triple t;
    try {
      std::size_t ui = 0, uj = 0, uv = 0;
      const long long i = std::stoll(si, &ui);
      const long long j = std::stoll(sj, &uj);
      t.value = std::stod(sv, &uv);
      if (ui != si.size() || uj != sj.size() || uv != sv.size()) throw std::invalid_argument("trailing");
      t.row = static_cast<Index>(i);
      t.col = static_cast<Index>(j);
    } catch (const std::exception&) {
      throw ParseError(path.filename().string() + ": malformed triple '" + line + "'", lineno);
    }
    if (!std::isfinite(t.value)) throw ParseError(path.filename().string() + ": non-finite value", lineno);
    if (t.row < 1 || t.col < 1)
      throw IndexOutOfRange(path.filename().string() + ":" + std::to_string(lineno) +
                            ": indices are 1-based and must be >= 1");
    if (!seen.insert({t.row, t.col}).second)
      throw ParseError(path.filename().string() + ": duplicate pair (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ")",
                       lineno);
    out.push_back(t);
  }
  return out;
}

/// Renumbers rows and columns densely in order of their ids, dropping ids
/// that never occur. Applying it to its own output changes nothing.
inline TripleData compact_triples(const std::vector<Triple>& triples) {
  detail::require(!triples.empty(), "compact_triples: no triples");
  std::map<Index, Index> rows, cols;
  for (const auto& t : triples) {
    rows.emplace(t.row, 0);
    cols.emplace(t.col, 0);
  }
  TripleData out;
  for (auto& [id, idx] : rows) {
    idx = static_cast<Index>(out.row_ids.size());
    out.row_ids.push_back(id);
  }
  for (auto& [id, idx] : cols) {
    idx = static_cast<Index>(out.col_ids.size());
    out.col_ids.push_back(id);
  }
  out.spec.rows = static_cast<Index>(rows.size());
  out.spec.cols = static_cast<Index>(cols.size());
  out.values.resize(static_cast<Index>(triples.size()));
  out.labels.resize(static_cast<Index>(triples.size()));
  out.spec.entries.reserve(triples.size());
  for (std::size_t k = 0; k < triples.size(); ++k) {
    const auto& t = triples[k];
    out.spec.entries.push_back(Entry{rows.at(t.row), cols.at(t.col)});
    out.values(static_cast<Index>(k)) = t.value;
    out.labels(static_cast<Index>(k)) = binarize_rating(t.value);
  }
  return out;
}

inline TripleData load_triples(const std::filesystem::path& path) {
  const auto triples = read_triples(path);
  if (triples.empty()) throw ParseError(path.filename().string() + ": no triples", 1);
  return compact_triples(triples);
}

/// Maps a held-out file onto the index space of `train`; pairs whose row or
/// column does not occur in training are skipped and counted in `dropped`.
inline TripleData load_test_triples(const std::filesystem::path& path, const TripleData& train,
                                    std::size_t* dropped = nullptr) {
  const auto triples = read_triples(path);
  std::map<Index, Index> rows, cols;
  for (std::size_t i = 0; i < train.row_ids.size(); ++i) rows[train.row_ids[i]] = static_cast<Index>(i);
  for (std::size_t j = 0; j < train.col_ids.size(); ++j) cols[train.col_ids[j]] = static_cast<Index>(j);
  TripleData out;
  out.spec.rows = train.spec.rows;
  out.spec.cols = train.spec.cols;
  out.row_ids = train.row_ids;
  out.col_ids = train.col_ids;
  std::vector<double> vals;
  std::size_t skipped = 0;
  for (const auto& t : triples) {
    const auto r = rows.find(t.row);
    const auto c = cols.find(t.col);
    if (r == rows.end() || c == cols.end()) {
      ++skipped;
      continue;
    }
    out.spec.entries.push_back(Entry{r->second, c->second});
    vals.push_back(t.value);
  }
  out.values = Eigen::Map<const VecR>(vals.data(), static_cast<Index>(vals.size()));
  out.labels = out.values.unaryExpr([](double v) { return binarize_rating(v); });
  if (dropped) *dropped = skipped;
  return out;
}

/// Writes 1-indexed triples; `row_ids`/`col_ids` restore original ids when given.
inline void write_triples(const std::filesystem::path& path, const std::vector<Entry>& entries,
                          const VecR& values, const std::vector<Index>& row_ids = {},
                          const std::vector<Index>& col_ids = {}) {
  detail::require_dims(static_cast<Index>(entries.size()) == values.size(),
                       "write_triples: one value per entry");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    const Index i = row_ids.empty() ? e.row + 1 : row_ids.at(static_cast<std::size_t>(e.row));
    const Index j = col_ids.empty() ? e.col + 1 : col_ids.at(static_cast<std::size_t>(e.col));
    os << i << ' ' << j << ' ' << values(static_cast<Index>(k)) << '\n';
  }
}

}  // namespace sketchycgm
