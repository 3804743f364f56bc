#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "sketchycgm/cli.hpp"

namespace cli = sketchycgm::cli;

namespace {

// Flags shared by every subcommand; each maps onto the config key of the same
// name (dashes become underscores) and overrides the --config file.
const std::vector<std::pair<std::string, std::string>> kFlags{
    {"problem", "scalar | phase | ptychography | completion | triples"},
    {"template", "schatten1 | psd"},
    {"loss", "gauss | huber | logistic | poisson"},
    {"rank", "sketch / reconstruction rank r"},
    {"alpha", "constraint radius"},
    {"alphas", "comma-separated radii: one solve per value plus sweep.csv"},
    {"alpha-mode", "mean-b | truth | energy (used when --alpha is absent)"},
    {"eps", "duality-gap tolerance"},
    {"max-iters", "iteration cap"},
    {"variant", "standard | poisson"},
    {"seed", "master seed"},
    {"trace-every", "evaluate metrics every N iterations"},
    {"out", "output directory"},
    {"n", "columns / signal length"},
    {"m", "rows (completion)"},
    {"views", "coded-diffraction or ptychography views s"},
    {"q", "ptychography window size"},
    {"noise", "none | gaussian | poisson"},
    {"snr-db", "noise level in dB"},
    {"true-rank", "rank of the synthetic completion truth"},
    {"observed", "observed fraction p (completion)"},
    {"train-split", "share of observed entries used for training"},
    {"noise-std", "completion noise standard deviation"},
    {"train", "training triple file"},
    {"test", "test triple file"},
    {"ns", "bench-memory: comma-separated n values"},
    {"bench-iters", "bench-memory: iterations per run"},
    {"trials", "sketch-test: trials per rank"},
    {"tail-trials", "sketch-test: trials for the tail bound"},
    {"tail", "sketch-test: Frobenius norm of the tail"},
    {"krylov-dim", "Lanczos basis size"},
    {"spectral-tol", "Lanczos relative residual tolerance"},
};

struct Parsed {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

void add_flags(CLI::App* sub, Parsed& p) {
  sub->add_option("--config", p.config_path, "key=value configuration file");
  sub->add_option("--set", p.sets, "extra key=value overrides");
  for (const auto& [name, help] : kFlags) sub->add_option("--" + name, p.flags[name], help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storage-optimal conditional gradient solver (SketchyCGM)"};
  app.require_subcommand(1);
  Parsed parsed;
  std::map<std::string, CLI::App*> subs;
  subs["solve"] = app.add_subcommand("solve", "run SketchyCGM and write trace.csv, U/S/V.csv, summary.json");
  subs["sketch-test"] = app.add_subcommand("sketch-test", "statistical checks of the sketch reconstruction");
  subs["bench-memory"] = app.add_subcommand("bench-memory", "peak live scalars, SketchyCGM vs dense CGM");
  subs["gen"] = app.add_subcommand("gen", "write a synthetic problem to disk");
  for (auto& [_, sub] : subs) add_flags(sub, parsed);
  CLI11_PARSE(app, argc, argv);

  cli::RunConfig cfg;
  try {
    if (!parsed.config_path.empty()) cfg = cli::RunConfig::from_file(parsed.config_path);
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) cfg.subcommand = name;
    for (const auto& [name, value] : parsed.flags)
      if (subs[cfg.subcommand]->count("--" + name) > 0) cfg.set(name, value);
    for (const auto& kv : parsed.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw sketchycgm::InvalidArgument("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }

    if (cfg.subcommand == "solve" && cfg.has("alphas")) {
      cli::run_alpha_sweep(cfg, std::cout);
    } else if (cfg.subcommand == "solve") {
      cli::run_solve(cfg, std::cout);
    } else if (cfg.subcommand == "bench-memory") {
      cli::run_bench_memory(cfg, std::cout);
    } else if (cfg.subcommand == "sketch-test") {
      bool ok = false;
      cli::run_sketch_test(cfg, std::cout, &ok);
      return ok ? 0 : 1;
    } else {
      cli::run_gen(cfg, std::cout);
    }
  } catch (const std::exception& e) {
    const auto err = cli::error_json(e);
    std::cerr << err.dump() << '\n';
    if (cfg.has("out")) {
      try {
        std::filesystem::create_directories(cfg.get("out", "."));
        std::ofstream(std::filesystem::path(cfg.get("out", ".")) / "error.json") << err.dump(2) << '\n';
      } catch (...) {
      }
    }
    return 2;
  }
  return 0;
}
