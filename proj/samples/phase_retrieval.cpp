// Recover a complex signal from coded-diffraction intensities |A x|^2.

#include <iostream>

#include "sketchycgm/sketchycgm.hpp"

int main() {
  using namespace sketchycgm;

  SyntheticPhaseSpec gen;
  gen.n = 128;
  gen.views = 10;
  gen.noise = NoiseKind::gaussian;
  gen.snr_db = 20.0;
  gen.max_iters = 300;
  gen.seed = 7;
  PhaseProblem problem = gen_phase_problem(gen);

  SolveOptions<cplx> opts;
  opts.trace_every = 50;
  opts.evaluator = [&](const FactoredMatrix<cplx>& x) {
    return std::vector<std::pair<std::string, double>>{
        {"error", phase_aligned_error<cplx>(x.top_vector(), problem.truth)}};
  };
  const auto result = solve(problem.spec, opts);

  for (const auto& rec : result.trace)
    if (!rec.metrics.empty())
      std::cout << "t=" << rec.t << "  gap=" << rec.gap << "  error=" << rec.metrics[0].second << '\n';
  std::cout << "final relative error "
            << phase_aligned_error<cplx>(result.solution.top_vector(), problem.truth) << " after "
            << result.iterations << " iterations\n";
}
