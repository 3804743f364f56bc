// Fill in a rank-3 matrix from 30% of its entries and score held-out cells.

#include <iostream>

#include "sketchycgm/sketchycgm.hpp"

int main() {
  using namespace sketchycgm;

  SyntheticCompletionSpec gen;
  gen.m = 200;
  gen.n = 150;
  gen.true_rank = 3;
  gen.observed = 0.3;
  gen.noise_std = 0.1;
  gen.rank = 3;
  gen.max_iters = 2000;
  gen.seed = 1;
  CompletionProblem problem = gen_completion_problem(gen);

  const auto result = solve(problem.spec);
  std::cout << "iterations " << result.iterations << ", gap " << result.final_gap << '\n'
            << "test error (gauss) " << test_error(result.solution, problem.eval) << '\n'
            << "leading singular values";
  for (Index j = 0; j < result.solution.rank(); ++j) std::cout << ' ' << result.solution.sigma(j);
  std::cout << "\ntruth                  ";
  for (Index j = 0; j < problem.truth.rank(); ++j) std::cout << ' ' << problem.truth.sigma(j);
  std::cout << '\n';
}
