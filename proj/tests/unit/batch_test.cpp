#include "dynassign/batch.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dynassign/error.hpp"
#include "support/oracles.hpp"

namespace dynassign {
namespace {

AgentPool Agents(std::vector<int> caps) {
  std::vector<std::string> ids;
  for (std::size_t a = 0; a < caps.size(); ++a) ids.push_back("a" + std::to_string(a + 1));
  return AgentPool(ids, caps);
}

HistoricalPool Pool(std::vector<std::vector<double>> vectors) {
  std::vector<std::string> ids;
  for (std::size_t a = 0; a < vectors.front().size(); ++a) {
    ids.push_back("a" + std::to_string(a + 1));
  }
  return HistoricalPool(ids, std::move(vectors));
}

MechanismConfig Config(MechanismKind kind, int m, std::uint64_t seed = 1) {
  MechanismConfig c;
  c.kind = kind;
  c.m = m;
  c.seed = seed;
  return c;
}

std::vector<double> Uniform(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = unif(rng);
  return v;
}

std::vector<double> Dyadic(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = std::uniform_int_distribution<int>(0, 32)(rng) / 32.0;
  return v;
}

void ExpectSame(const Recommendation& a, const Recommendation& b) {
  EXPECT_EQ(a.kind, b.kind);
  EXPECT_EQ(a.chosen_agent, b.chosen_agent);
  EXPECT_EQ(a.draws_used, b.draws_used);
  ASSERT_EQ(a.per_agent_score.size(), b.per_agent_score.size());
  for (std::size_t k = 0; k < a.per_agent_score.size(); ++k) {
    EXPECT_EQ(a.per_agent_score[k].agent, b.per_agent_score[k].agent);
    EXPECT_EQ(a.per_agent_score[k].score, b.per_agent_score[k].score);
  }
  EXPECT_EQ(a.score_stderr, b.score_stderr);
  EXPECT_EQ(a.expected_loss_estimate, b.expected_loss_estimate);
}

TEST(BatchApproxTest, TwoItemExample) {
  const std::vector<std::vector<double>> items{{0.1, 0.5}, {0.2, 0.9}};
  const auto pool = Pool({{0.5, 0.5}});
  const DynamicState state(Agents({1, 1}));
  const BatchView batch{items, 1, 2};
  for (auto kind : {MechanismKind::kMinRisk, MechanismKind::kApproxMinRisk}) {
    const auto recs = AssignBatchApprox(state, batch, pool, Config(kind, 20));
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].chosen_agent, 1);
    EXPECT_EQ(recs[1].chosen_agent, 0);
  }
  const auto exact = AssignBatchExact(state, batch, pool, Config(MechanismKind::kMinRisk, 20));
  EXPECT_EQ(exact.agents, (std::vector<int>{1, 0}));
  EXPECT_NEAR(exact.expected_cost, 0.7, 1e-15);
  // One-by-one without the second vector the first item goes greedy.
  EXPECT_EQ(AssignGreedy(state, items[0]).chosen_agent, 0);
}

TEST(BatchApproxTest, SingletonBatchIsInnerMechanism) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> vectors;
    for (int k = 0; k < 25; ++k) vectors.push_back(Uniform(rng, 4));
    const auto pool = Pool(vectors);
    const DynamicState state(Agents({3, 2, 2, 3}));
    const std::vector<std::vector<double>> items{Uniform(rng, 4)};
    const std::uint64_t index = 1 + static_cast<std::uint64_t>(trial % 5);
    const BatchView batch{items, index, 9};
    for (auto kind : {MechanismKind::kMinRisk, MechanismKind::kApproxMinRisk}) {
      const auto config = Config(kind, 64, 1000 + static_cast<std::uint64_t>(trial));
      const auto recs = AssignBatchApprox(state, batch, pool, config);
      ASSERT_EQ(recs.size(), 1u);
      const ArrivalContext arrival{index, 9};
      const auto direct = kind == MechanismKind::kMinRisk
                              ? AssignMinRisk(state, items[0], pool, arrival, config)
                              : AssignApproxMinRisk(state, items[0], pool, arrival, config);
      ExpectSame(recs[0], direct);
    }
  }
}

TEST(BatchApproxTest, FullHorizonBatchReproducesUniqueStaticOptimum) {
  std::mt19937_64 rng(22);
  const auto pool = Pool({{0.5, 0.5, 0.5}});
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> items;
    for (int i = 0; i < 6; ++i) items.push_back(Uniform(rng, 3));
    const std::vector<int> caps{2, 2, 2};
    // Confirm uniqueness by enumeration: the runner-up must be strictly worse.
    double best = oracle::kInf, second = oracle::kInf;
    std::vector<int> left = caps, pick(6);
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == items.size()) {
        double total = 0.0;
        for (std::size_t r = 0; r < items.size(); ++r) {
          total += items[r][static_cast<std::size_t>(pick[r])];
        }
        if (total < best) {
          second = best;
          best = total;
        } else if (total < second) {
          second = total;
        }
        return;
      }
      for (std::size_t a = 0; a < 3; ++a) {
        if (left[a] == 0) continue;
        --left[a];
        pick[i] = static_cast<int>(a);
        self(self, i + 1);
        ++left[a];
      }
    };
    rec(rec, 0);
    if (second - best < 1e-9) continue;
    ++checked;
    const DynamicState state(Agents(caps));
    const auto recs = AssignBatchApprox(state, BatchView{items, 1, 6}, pool,
                                        Config(MechanismKind::kApproxMinRisk, 5));
    const auto opt = StaticOptimalAssign(items, Agents(caps));
    double total = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      EXPECT_EQ(recs[i].chosen_agent, opt.item_agent[i]);
      total += items[i][static_cast<std::size_t>(recs[i].chosen_agent)];
    }
    EXPECT_EQ(total, opt.total_cost);
  }
  EXPECT_GE(checked, 45);
}

TEST(BatchApproxTest, RespectsCapacityAndInputs) {
  const std::vector<std::vector<double>> items{{0.1, 0.9}, {0.1, 0.9}, {0.1, 0.9}};
  const auto pool = Pool({{0.5, 0.5}});
  const DynamicState state(Agents({1, 3}));
  const auto recs =
      AssignBatchApprox(state, BatchView{items, 1, 3}, pool, Config(MechanismKind::kMinRisk, 8));
  int to_first = 0;
  for (const auto& r : recs) to_first += r.chosen_agent == 0;
  EXPECT_EQ(to_first, 1);
  EXPECT_EQ(state.TotalRemaining(), 4);
  EXPECT_THROW(AssignBatchApprox(state, BatchView{items, 1, 3}, pool,
                                 Config(MechanismKind::kGreedy, 8)),
               Error);
  EXPECT_THROW(AssignBatchApprox(state, BatchView{items, 2, 3}, pool,
                                 Config(MechanismKind::kMinRisk, 8)),
               Error);
}

TEST(BatchExactTest, SingletonMatchesPerAgentMinRisk) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> vectors;
    for (int k = 0; k < 10; ++k) vectors.push_back(Uniform(rng, 3));
    const auto pool = Pool(vectors);
    const DynamicState state(Agents({2, 3, 2}));
    const std::vector<std::vector<double>> items{Uniform(rng, 3)};
    auto config = Config(MechanismKind::kMinRisk, 40, static_cast<std::uint64_t>(trial));
    config.sigma_route = SigmaRoute::kPerAgentSolve;
    const auto exact = AssignBatchExact(state, BatchView{items, 2, 6}, pool, config);
    const auto direct = AssignMinRisk(state, items[0], pool, {2, 6}, config);
    ASSERT_EQ(exact.recommendations.size(), 1u);
    EXPECT_EQ(exact.recommendations[0].chosen_agent, direct.chosen_agent);
    ASSERT_EQ(exact.recommendations[0].per_agent_score.size(), direct.per_agent_score.size());
    for (std::size_t k = 0; k < direct.per_agent_score.size(); ++k) {
      EXPECT_EQ(exact.recommendations[0].per_agent_score[k].score,
                direct.per_agent_score[k].score);
    }
  }
}

TEST(BatchExactTest, NoFutureItemsIsStaticLap) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> items;
    for (int i = 0; i < 3; ++i) items.push_back(Dyadic(rng, 3));
    const std::vector<int> caps{1, 2, 1};
    const auto pool = Pool({{0.0, 0.0, 0.0}});
    const auto exact = AssignBatchExact(DynamicState(Agents(caps)), BatchView{items, 1, 3},
                                        pool, Config(MechanismKind::kMinRisk, 30));
    EXPECT_EQ(exact.expected_cost, oracle::CapacitatedOptimum(items, caps));
  }
}

TEST(BatchExactTest, MatchesTupleBruteForce) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t support = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t size = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t horizon = static_cast<std::size_t>((trial / 3) % 3);
    std::vector<std::vector<double>> vectors;
    for (std::size_t k = 0; k < support; ++k) vectors.push_back(Dyadic(rng, 3));
    std::vector<int> caps{1, 1, 1};
    for (std::size_t k = 3; k < size + horizon + static_cast<std::size_t>(trial % 2); ++k) {
      ++caps[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
    }
    std::vector<std::vector<double>> items;
    for (std::size_t i = 0; i < size; ++i) items.push_back(Dyadic(rng, 3));
    auto config = Config(MechanismKind::kMinRisk, 0);
    config.mode = DrawMode::kExhaustive;
    const auto exact = AssignBatchExact(DynamicState(Agents(caps)),
                                        BatchView{items, 1, size + horizon},
                                        HistoricalPool({"a", "b", "c"}, vectors), config);
    const auto expected = oracle::BruteForceTuples(items, caps, vectors, horizon);
    ASSERT_EQ(exact.tuples.size(), expected.size());
    std::size_t argmin = 0;
    for (std::size_t t = 0; t < expected.size(); ++t) {
      EXPECT_EQ(exact.tuples[t].agents, expected[t].agents);
      EXPECT_EQ(exact.tuples[t].mean_cost, expected[t].mean_cost);
      if (expected[t].mean_cost < expected[argmin].mean_cost) argmin = t;
    }
    EXPECT_EQ(exact.agents, expected[argmin].agents);
  }
}

TEST(BatchExactTest, Guards) {
  const auto pool = Pool({{0.1, 0.2}});
  const std::vector<std::vector<double>> five(5, std::vector<double>{0.1, 0.2});
  EXPECT_THROW(AssignBatchExact(DynamicState(Agents({3, 3})), BatchView{five, 1, 5}, pool,
                                Config(MechanismKind::kMinRisk, 5)),
               Error);
  const std::vector<std::vector<double>> two(2, std::vector<double>{0.1, 0.2});
  EXPECT_THROW(AssignBatchExact(DynamicState(Agents({5, 4})), BatchView{two, 1, 2}, pool,
                                Config(MechanismKind::kMinRisk, 5)),
               Error);
  try {
    AssignBatchExact(DynamicState(Agents({1, 1})), BatchView{two, 1, 3}, pool,
                     Config(MechanismKind::kMinRisk, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

// Batch information cannot hurt on average: realized cost with batches of two
// against one-by-one min-risk over seeded replications of one instance.
TEST(BatchApproxTest, BatchesDoNotHurtOnAverage) {
  std::mt19937_64 rng(26);
  std::vector<std::vector<double>> vectors;
  for (int k = 0; k < 40; ++k) vectors.push_back(Uniform(rng, 3));
  const auto pool = Pool(vectors);
  const std::vector<int> caps{2, 2, 2};
  constexpr int kReps = 200;
  std::vector<double> diff;
  for (int rep = 0; rep < kReps; ++rep) {
    std::mt19937_64 draw(static_cast<std::uint64_t>(rep));
    std::vector<std::vector<double>> cohort;
    for (int i = 0; i < 6; ++i) {
      cohort.push_back(vectors[std::uniform_int_distribution<std::size_t>(0, 39)(draw)]);
    }
    const auto config = Config(MechanismKind::kMinRisk, 60, static_cast<std::uint64_t>(rep));
    DynamicState one(Agents(caps));
    double one_cost = 0.0;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      const auto rec = AssignMinRisk(one, cohort[i], pool, {i + 1, 6}, config);
      one_cost += cohort[i][static_cast<std::size_t>(rec.chosen_agent)];
      one.Commit({}, rec.chosen_agent);
    }
    DynamicState batched(Agents(caps));
    double batch_cost = 0.0;
    for (std::size_t b = 0; b < 3; ++b) {
      const std::span<const std::vector<double>> group(cohort.data() + 2 * b, 2);
      const auto recs = AssignBatchApprox(batched, BatchView{group, 2 * b + 1, 6}, pool, config);
      for (std::size_t k = 0; k < 2; ++k) {
        batch_cost += group[k][static_cast<std::size_t>(recs[k].chosen_agent)];
        batched.Commit({}, recs[k].chosen_agent);
      }
    }
    diff.push_back(batch_cost - one_cost);
  }
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= kReps;
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double se = std::sqrt(ss / (kReps - 1) / kReps);
  EXPECT_LE(mean, 3.0 * se);
}

}  // namespace
}  // namespace dynassign
