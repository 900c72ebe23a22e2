#include "dynassign/lap.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "dynassign/error.hpp"

namespace dynassign {

bool operator==(const Assignment& a, const Assignment& b) {
  return a.row_to_col == b.row_to_col && a.total_cost == b.total_cost;
}

namespace {

CostMatrix RandomMatrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = unif(rng);
  return CostMatrix(rows, cols, std::move(v));
}

TEST(SolveTest, ZeroDiagonal) {
  const auto a = Solve(CostMatrix::FromRows({{0, 1}, {1, 0}}));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1}));
  EXPECT_EQ(a.total_cost, 0.0);
}

TEST(SolveTest, OffDiagonalOptimum) {
  const auto a = Solve(CostMatrix::FromRows({{1, 2}, {2, 4}}));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{1, 0}));
  EXPECT_EQ(a.total_cost, 4.0);
}

TEST(SolveTest, SingleItem) {
  const auto a = Solve(CostMatrix::FromRows({{3}}));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0}));
  EXPECT_EQ(a.total_cost, 3.0);
}

TEST(SolveTest, EmptyMatrix) {
  const auto a = Solve(CostMatrix(0, 3, {}));
  EXPECT_TRUE(a.row_to_col.empty());
  EXPECT_EQ(a.total_cost, 0.0);
}

TEST(SolveTest, RejectsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    CostMatrix::FromRows({{1, nan}});
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

TEST(SolveTest, MoreRowsThanColumnsIsInfeasible) {
  try {
    Solve(CostMatrix::FromRows({{1}, {2}}));
    FAIL() << "expected infeasibility";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(SolveTest, TiesResolveTowardLowColumns) {
  const auto a = Solve(CostMatrix::FromRows({{1, 1, 1}}));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0}));
  const auto b = Solve(CostMatrix::FromRows({{0, 0}, {0, 0}}));
  EXPECT_EQ(b.total_cost, 0.0);
  EXPECT_EQ(b, Solve(CostMatrix::FromRows({{0, 0}, {0, 0}})));
}

TEST(BruteForceTest, Examples) {
  EXPECT_EQ(BruteForceSolve(CostMatrix::FromRows({{1, 2}, {2, 4}})).total_cost, 4.0);
  EXPECT_EQ(BruteForceSolve(CostMatrix::FromRows({{0}})).total_cost, 0.0);
}

TEST(BruteForceTest, SizeCap) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(BruteForceSolve(RandomMatrix(rng, 2, 9)), Error);
}

TEST(BruteForceTest, ThreeByThreeAgreesWithSolve) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = RandomMatrix(rng, 3, 3);
    EXPECT_EQ(Solve(m).total_cost, BruteForceSolve(m).total_cost);
  }
}

TEST(SolvePropertyTest, MatchesBruteForceUpToSevenColumns) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cols = static_cast<std::size_t>(size(rng));
    const auto rows = static_cast<std::size_t>(std::uniform_int_distribution<int>(
        1, static_cast<int>(cols))(rng));
    const auto m = RandomMatrix(rng, rows, cols);
    const auto fast = Solve(m);
    ASSERT_EQ(fast.total_cost, BruteForceSolve(m).total_cost) << "trial " << trial;
    std::vector<int> cols_used = fast.row_to_col;
    std::sort(cols_used.begin(), cols_used.end());
    EXPECT_TRUE(std::adjacent_find(cols_used.begin(), cols_used.end()) == cols_used.end());
  }
}

TEST(SolvePropertyTest, RowPermutationPermutesAssignment) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = RandomMatrix(rng, 5, 6);
    std::vector<std::size_t> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> rows;
    for (auto p : perm) rows.emplace_back(m.row(p).begin(), m.row(p).end());
    const auto base = Solve(m);
    const auto permuted = Solve(CostMatrix::FromRows(rows));
    EXPECT_NEAR(permuted.total_cost, base.total_cost, 1e-12);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      EXPECT_EQ(permuted.row_to_col[i], base.row_to_col[perm[i]]);
    }
  }
}

TEST(SolvePropertyTest, RowShiftKeepsArgmin) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = RandomMatrix(rng, 4, 6);
    std::vector<double> shifted(m.values().begin(), m.values().end());
    const double shift = 0.25;  // dyadic: shifted entries stay exact enough
    for (std::size_t c = 0; c < 6; ++c) shifted[2 * 6 + c] += shift;
    const auto base = Solve(m);
    const auto moved = Solve(CostMatrix(4, 6, shifted));
    EXPECT_EQ(moved.row_to_col, base.row_to_col);
    EXPECT_NEAR(moved.total_cost - base.total_cost, shift, 1e-12);
  }
}

TEST(SolvePropertyTest, DeterministicAcrossThreads) {
  std::mt19937_64 rng(9);
  const auto m = RandomMatrix(rng, 30, 40);
  const auto reference = Solve(m);
  std::vector<Assignment> results(4);
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < results.size(); ++k) {
    threads.emplace_back([&, k] { results[k] = Solve(m); });
  }
  for (auto& t : threads) t.join();
  for (const auto& r : results) {
    EXPECT_EQ(r.row_to_col, reference.row_to_col);
    EXPECT_EQ(r.total_cost, reference.total_cost);
  }
}

TEST(ExpandCapacityTest, SingleAgentDuplicated) {
  const auto out = ExpandCapacity(CostMatrix::FromRows({{0.5}}), AgentPool({"a"}, {3}));
  ASSERT_EQ(out.matrix.cols(), 3u);
  for (std::size_t u = 0; u < 3; ++u) EXPECT_EQ(out.matrix(0, u), 0.5);
  EXPECT_EQ(out.unit_to_agent, (std::vector<int>{0, 0, 0}));
}

TEST(ExpandCapacityTest, UnevenCapacities) {
  const auto out =
      ExpandCapacity(CostMatrix::FromRows({{0.1, 0.7}}), AgentPool({"a", "b"}, {2, 1}));
  EXPECT_EQ(out.matrix.row(0)[0], 0.1);
  EXPECT_EQ(out.matrix.row(0)[1], 0.1);
  EXPECT_EQ(out.matrix.row(0)[2], 0.7);
  EXPECT_EQ(out.unit_to_agent, (std::vector<int>{0, 0, 1}));
}

TEST(ExpandCapacityTest, InsufficientCapacity) {
  try {
    ExpandCapacity(CostMatrix::FromRows({{1, 2}, {3, 4}, {5, 6}}), AgentPool({"a", "b"}, {1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(ExpandCapacityTest, SolveRespectsCapacities) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cap(0, 3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> z(4);
    for (auto& x : z) x = cap(rng);
    const int total = std::accumulate(z.begin(), z.end(), 0);
    if (total == 0) continue;
    const auto items = static_cast<std::size_t>(
        std::uniform_int_distribution<int>(1, total)(rng));
    const auto costs = RandomMatrix(rng, items, 4);
    const auto ex = ExpandCapacity(costs, AgentPool({"a", "b", "c", "d"}, z));
    const auto sol = Solve(ex.matrix);
    std::vector<int> load(4, 0);
    for (int unit : sol.row_to_col) ++load[static_cast<std::size_t>(ex.unit_to_agent[static_cast<std::size_t>(unit)])];
    for (std::size_t j = 0; j < 4; ++j) EXPECT_LE(load[j], z[j]);
  }
}

double CapacitatedViaExpansion(const CostMatrix& m, const std::vector<int>& caps) {
  std::vector<std::string> ids(caps.size(), "x");
  return Solve(ExpandCapacity(m, AgentPool(ids, caps)).matrix).total_cost;
}

TEST(CapacitatedLapTest, MatchesExpandedSolve) {
  std::mt19937_64 rng(12);
  CapacitatedLap lap;
  for (int trial = 0; trial < 500; ++trial) {
    const auto agents = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 6)(rng));
    std::vector<int> caps(agents);
    for (auto& z : caps) z = std::uniform_int_distribution<int>(0, 4)(rng);
    const int total = std::accumulate(caps.begin(), caps.end(), 0);
    if (total == 0) continue;
    const auto items = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, total)(rng));
    const auto m = RandomMatrix(rng, items, agents);
    std::vector<const double*> rows;
    for (std::size_t i = 0; i < items; ++i) rows.push_back(m.row(i).data());
    const double value = lap.Solve(rows, caps);
    ASSERT_NEAR(value, CapacitatedViaExpansion(m, caps), 1e-12) << "trial " << trial;
    std::vector<int> load(agents, 0);
    double recomputed = 0.0;
    for (std::size_t i = 0; i < items; ++i) {
      const int a = lap.row_agent()[i];
      ++load[static_cast<std::size_t>(a)];
      recomputed += m(i, static_cast<std::size_t>(a));
    }
    EXPECT_EQ(recomputed, value);
    for (std::size_t j = 0; j < agents; ++j) EXPECT_LE(load[j], caps[j]);
  }
}

TEST(CapacitatedLapTest, UnitRemovalDeltasMatchResolve) {
  std::mt19937_64 rng(13);
  CapacitatedLap lap, check;
  for (int trial = 0; trial < 500; ++trial) {
    const auto agents = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 6)(rng));
    std::vector<int> caps(agents);
    for (auto& z : caps) z = std::uniform_int_distribution<int>(0, 4)(rng);
    const int total = std::accumulate(caps.begin(), caps.end(), 0);
    if (total < 2) continue;
    const auto items = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, total - 1)(rng));
    const auto m = RandomMatrix(rng, items, agents);
    std::vector<const double*> rows;
    for (std::size_t i = 0; i < items; ++i) rows.push_back(m.row(i).data());
    const double base = lap.Solve(rows, caps);
    std::vector<double> deltas(agents);
    lap.UnitRemovalDeltas(deltas);
    for (std::size_t j = 0; j < agents; ++j) {
      if (caps[j] == 0) {
        EXPECT_TRUE(std::isinf(deltas[j]));
        continue;
      }
      auto reduced = caps;
      --reduced[j];
      const double direct = check.Solve(rows, reduced);
      EXPECT_NEAR(base + deltas[j], direct, 1e-12) << "trial " << trial << " agent " << j;
    }
  }
}

TEST(CapacitatedLapTest, FirstRowMaskIsHonoured) {
  const std::vector<double> r0{0.0, 5.0}, r1{0.0, 1.0};
  std::vector<const double*> rows{r0.data(), r1.data()};
  std::vector<int> caps{1, 1};
  std::vector<std::uint8_t> allowed{0, 1};
  CapacitatedLap lap;
  EXPECT_EQ(lap.Solve(rows, caps, allowed), 5.0);
  EXPECT_EQ(lap.row_agent()[0], 1);
  EXPECT_EQ(lap.Solve(rows, caps), 1.0);
  EXPECT_EQ(lap.row_agent()[0], 0);
}

TEST(CapacitatedLapTest, InfeasibleThrows) {
  const std::vector<double> r{1.0};
  std::vector<const double*> rows{r.data(), r.data()};
  std::vector<int> caps{1};
  CapacitatedLap lap;
  EXPECT_THROW(lap.Solve(rows, caps), Error);
}

}  // namespace
}  // namespace dynassign
