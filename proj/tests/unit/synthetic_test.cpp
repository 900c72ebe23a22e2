#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dynassign/error.hpp"
#include "dynassign/synthetic.hpp"

namespace dynassign {
namespace {

TEST(Synthetic, SameSeedSameInstance) {
  SyntheticSpec spec;
  spec.seed = 11;
  const auto a = GenerateSynthetic(spec);
  const auto b = GenerateSynthetic(spec);
  EXPECT_EQ(a.pool, b.pool);
  EXPECT_EQ(a.cohort, b.cohort);
  spec.seed = 12;
  EXPECT_NE(GenerateSynthetic(spec).pool, a.pool);
}

TEST(Synthetic, ShapesAndCostRange) {
  SyntheticSpec spec;
  spec.agents = 4;
  spec.pool_size = 50;
  spec.cohort_size = 8;
  const auto inst = GenerateSynthetic(spec);
  ASSERT_EQ(inst.agent_ids.size(), 4u);
  EXPECT_EQ(inst.agent_ids.front(), "A1");
  ASSERT_EQ(inst.pool.size(), 50u);
  ASSERT_EQ(inst.cohort.size(), 8u);
  for (const auto& v : inst.pool) {
    ASSERT_EQ(v.size(), 4u);
    for (double c : v) {
      EXPECT_GT(c, 0.0);
      EXPECT_LT(c, 1.0);
    }
  }
  EXPECT_EQ(inst.Pool().size(), 50u);
}

TEST(Synthetic, CohortSizeDoesNotShiftThePool) {
  SyntheticSpec spec;
  spec.cohort_size = 3;
  const auto small = GenerateSynthetic(spec);
  spec.cohort_size = 30;
  const auto large = GenerateSynthetic(spec);
  EXPECT_EQ(small.pool, large.pool);
  EXPECT_EQ(small.cohort[2], large.cohort[2]);
}

TEST(Synthetic, ZeroSpreadGivesIdenticalVectors) {
  SyntheticSpec spec;
  spec.agent_sd = spec.item_sd = spec.affinity_sd = spec.noise_sd = 0.0;
  spec.intercept = 0.0;
  const auto inst = GenerateSynthetic(spec);
  for (const auto& v : inst.pool) {
    for (double c : v) EXPECT_EQ(c, 0.5);
  }
}

TEST(Synthetic, RejectsBadSpecs) {
  SyntheticSpec spec;
  spec.agents = 0;
  EXPECT_THROW(GenerateSynthetic(spec), Error);
  spec = {};
  spec.noise_sd = -1.0;
  EXPECT_THROW(GenerateSynthetic(spec), Error);
  spec = {};
  spec.clusters = 0;
  EXPECT_THROW(GenerateSynthetic(spec), Error);
}

TEST(Synthetic, EvenCapacitiesSpreadRemainderFirst) {
  const AgentPool p = EvenCapacities({"a", "b", "c"}, 8);
  EXPECT_EQ(p.capacities, (std::vector<int>{3, 3, 2}));
  EXPECT_EQ(p.TotalCapacity(), 8);
}

TEST(Synthetic, NormalDeviateMoments) {
  SplitMix64 rng(5);
  const int n = 200000;
  double s = 0.0;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = NormalDeviate(rng);
    s += z;
    ss += z * z;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.02);
}

}  // namespace
}  // namespace dynassign
