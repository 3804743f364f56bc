#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sketchycgm/cli.hpp"

using namespace sketchycgm;
using cli::RunConfig;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(RunConfig, ParsesFileAndNormalizesKeys) {
  const auto dir = temp_dir("sketchycgm_cfg");
  std::ofstream(dir / "run.cfg") << "# comment\nproblem = completion\n\nmax-iters=50  # trailing\nns = 1, 2,3\n";
  const auto cfg = RunConfig::from_file(dir / "run.cfg");
  EXPECT_EQ(cfg.get("problem", ""), "completion");
  EXPECT_EQ(cfg.get_int("max_iters", 0), 50);
  EXPECT_EQ(cfg.get_list("ns", {}), (std::vector<Index>{1, 2, 3}));
  EXPECT_TRUE(cfg.has("max-iters"));
  EXPECT_DOUBLE_EQ(cfg.get_double("alpha", 2.5), 2.5);
  std::filesystem::remove_all(dir);
}

TEST(RunConfig, ReportsBadLine) {
  const auto dir = temp_dir("sketchycgm_cfg_bad");
  std::ofstream(dir / "bad.cfg") << "a = 1\nno equals sign\n";
  try {
    (void)RunConfig::from_file(dir / "bad.cfg");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    const auto j = cli::error_json(e);
    EXPECT_EQ(j["error"]["kind"], "ParseError");
    EXPECT_EQ(j["error"]["line"], 2);
  }
  std::filesystem::remove_all(dir);
}

TEST(RunConfig, ValidatesCombinations) {
  RunConfig cfg;
  cfg.set("problem", "completion");
  cfg.set("template", "psd");
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  RunConfig p;
  p.set("problem", "phase");
  p.set("variant", "poisson");
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.set("loss", "poisson");
  EXPECT_NO_THROW(p.validate());
  RunConfig bad;
  bad.set("max_iters", "ten");
  EXPECT_THROW(bad.get_int("max_iters", 1), InvalidArgument);
}

TEST(CliSolve, ScalarEndToEnd) {
  const auto dir = temp_dir("sketchycgm_solve_scalar");
  RunConfig cfg;
  cfg.set("problem", "scalar");
  cfg.set("alpha", "1");
  cfg.set("eps", "1e-4");
  cfg.set("out", dir.string());
  std::ostringstream log;
  const auto summary = cli::run_solve(cfg, log);
  EXPECT_TRUE(summary["converged"].get<bool>());
  EXPECT_LE(summary["gap"].get<double>(), 1e-4);
  for (const char* f : {"trace.csv", "U.csv", "S.csv", "V.csv", "summary.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const auto f = read_factored<double>(dir);
  EXPECT_NEAR(f.entry(0, 0), 0.5, 0.02);
  std::filesystem::remove_all(dir);
}

TEST(CliSolve, CompletionWritesMetrics) {
  const auto dir = temp_dir("sketchycgm_solve_completion");
  RunConfig cfg;
  cfg.set("problem", "completion");
  cfg.set("m", "30");
  cfg.set("n", "20");
  cfg.set("max_iters", "50");
  cfg.set("out", dir.string());
  std::ostringstream log;
  const auto summary = cli::run_solve(cfg, log);
  EXPECT_EQ(summary["iters"].get<int>(), 50);
  EXPECT_TRUE(summary["metrics"].is_object());
  EXPECT_GT(summary["peak_scalars"].get<long long>(), 0);
  std::filesystem::remove_all(dir);
}

TEST(CliSolve, MissingTrainFileIsIoError) {
  RunConfig cfg;
  cfg.set("problem", "triples");
  cfg.set("train", "/nonexistent/train.txt");
  cfg.set("alpha", "1");
  std::ostringstream log;
  try {
    (void)cli::run_solve(cfg, log);
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(cli::error_json(e)["error"]["kind"], "IoError");
  }
}

TEST(CliGen, CompletionThenTriplesSolve) {
  const auto dir = temp_dir("sketchycgm_gen");
  RunConfig gen;
  gen.subcommand = "gen";
  gen.set("problem", "completion");
  gen.set("m", "25");
  gen.set("n", "15");
  gen.set("out", dir.string());
  std::ostringstream log;
  const auto info = cli::run_gen(gen, log);
  EXPECT_TRUE(std::filesystem::exists(dir / "train.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "test.txt"));

  RunConfig solve;
  solve.set("problem", "triples");
  solve.set("train", (dir / "train.txt").string());
  solve.set("test", (dir / "test.txt").string());
  solve.set("alpha", std::to_string(info["alpha"].get<double>()));
  solve.set("max_iters", "30");
  solve.set("out", (dir / "run").string());
  const auto summary = cli::run_solve(solve, log);
  EXPECT_EQ(summary["iters"].get<int>(), 30);
  std::filesystem::remove_all(dir);
}

TEST(CliBench, SketchyPeakScalesLinearly) {
  const auto rows = cli::bench_memory({64, 128, 256}, 1, 10, 3, 0);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double ratio = static_cast<double>(rows[k].sketchy_peak) / static_cast<double>(rows[k - 1].sketchy_peak);
    EXPECT_NEAR(ratio, 2.0, 0.3);
    ASSERT_TRUE(rows[k].dense_peak.has_value());
  }
  std::ostringstream os;
  cli::write_bench_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "n,sketchycgm_peak_scalars,dense_cgm_peak_scalars");
}

TEST(CliBench, LinearFit) {
  const auto fit = cli::fit_linear({1, 2, 4}, {5, 7, 11});
  EXPECT_NEAR(fit.intercept, 3.0, 1e-12);
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_LE(fit.max_relative_residual, 1e-12);
}

TEST(CliSketchTest, ReportsBothSuites) {
  RunConfig cfg;
  cfg.subcommand = "sketch-test";
  cfg.set("m", "40");
  cfg.set("n", "30");
  cfg.set("trials", "5");
  cfg.set("tail_trials", "20");
  std::ostringstream log;
  bool ok = false;
  const auto report = cli::run_sketch_test(cfg, log, &ok);
  ASSERT_EQ(report.size(), 2u);
  EXPECT_EQ(report[0]["name"], "exactness");
  EXPECT_EQ(report[1]["name"], "tail_bound");
  EXPECT_TRUE(ok) << log.str();
}

TEST(CliSolve, AlphaSweep) {
  const auto dir = temp_dir("sketchycgm_sweep");
  RunConfig cfg;
  cfg.set("problem", "completion");
  cfg.set("m", "20");
  cfg.set("n", "15");
  cfg.set("max_iters", "20");
  cfg.set("alphas", "5, 10,20");
  cfg.set("out", dir.string());
  std::ostringstream log;
  const auto rows = cli::run_alpha_sweep(cfg, log);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[1]["alpha"].get<double>(), 10.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "alpha_2" / "summary.json"));
  std::filesystem::remove_all(dir);
}
