#include <gtest/gtest.h>

#include "frozen.hpp"
#include "instances.hpp"

using namespace sketchycgm;

// The acceptance binary compares against frozen.hpp; these recompute the
// oracle so a drift in the oracle or the generators is caught here.

TEST(FrozenOracle, GapInstanceOptima) {
  for (int i = 0; i < instances::kGapInstances; ++i) {
    const auto cp = instances::gap_instance(i, 10);
    const auto opt = instances::solve_oracle(cp.spec);
    EXPECT_LE(opt.fw_gap, 1e-12) << "instance " << i;
    EXPECT_NEAR(opt.value, frozen::kGapInstanceOptimum[i], 1e-12) << "instance " << i;
  }
}

TEST(FrozenOracle, Rank2Instance) {
  const auto cp = instances::rank2_instance(10);
  const auto opt = instances::solve_oracle(cp.spec);
  EXPECT_NEAR(opt.value, frozen::kRank2Optimum, 1e-12);
  Eigen::JacobiSVD<MatC> svd(opt.x);
  EXPECT_NEAR(svd.singularValues()(0), frozen::kRank2Singular[0], 1e-6);
  EXPECT_NEAR(svd.singularValues()(1), frozen::kRank2Singular[1], 1e-6);
  EXPECT_LE(svd.singularValues()(2), 1e-8);
}
