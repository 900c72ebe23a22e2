#include "dynassign/stochastic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dynassign/error.hpp"

namespace dynassign {
namespace {

HistoricalPool QuartilePool() {
  return HistoricalPool({"a", "b"}, {{0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}, {0.4, 0.6}});
}

TEST(DrawSetTest, ZeroCountIsEmpty) {
  EXPECT_TRUE(DrawSet(QuartilePool(), 0, {1, 1, 0}).empty());
}

TEST(DrawSetTest, SingleVectorSupport) {
  const HistoricalPool pool({"a", "b"}, {{0.3, 0.6}});
  const auto draws = DrawSet(pool, 3, {5, 2, 9});
  ASSERT_EQ(draws.size(), 3u);
  for (const auto& v : draws) EXPECT_EQ(v, (std::vector<double>{0.3, 0.6}));
}

TEST(DrawSetTest, FixedStreamIsReproducible) {
  const auto pool = QuartilePool();
  const DrawStream stream{42, 3, 17};
  EXPECT_EQ(DrawSet(pool, 25, stream), DrawSet(pool, 25, stream));
}

TEST(DrawSetTest, DistinctDrawIndicesGiveDistinctStreams) {
  const auto pool = QuartilePool();
  std::vector<std::size_t> a, b;
  DrawIndices(pool, 64, {42, 3, 0}, a);
  DrawIndices(pool, 64, {42, 3, 1}, b);
  EXPECT_NE(a, b);
  EXPECT_NE(DrawStream({42, 3, 0}).Seed(), DrawStream({42, 4, 0}).Seed());
  EXPECT_NE(DrawStream({42, 3, 0}).Seed(), DrawStream({43, 3, 0}).Seed());
}

TEST(DrawSetTest, IndicesAreRoughlyUniform) {
  const auto pool = QuartilePool();
  std::vector<std::size_t> idx;
  std::vector<int> counts(4, 0);
  for (std::uint64_t r = 0; r < 2000; ++r) {
    DrawIndices(pool, 10, {7, 1, r}, idx);
    for (auto k : idx) ++counts[k];
  }
  // 20,000 draws over 4 cells: expected 5,000 each, sd about 61.
  for (int c : counts) EXPECT_NEAR(c, 5000, 300);
}

TEST(HistoricalPoolTest, RejectsBadInput) {
  EXPECT_THROW(HistoricalPool({"a"}, {}), Error);
  EXPECT_THROW(HistoricalPool({"a", "b"}, {{0.1}}), Error);
  EXPECT_THROW(HistoricalPool({"a"}, {{std::nan("")}}), Error);
}

TEST(QuantileTest, Examples) {
  const QuantileTable table(QuartilePool());
  EXPECT_EQ(table.Quantile(std::size_t{0}, 0.2), 0.5);
  EXPECT_EQ(table.Quantile(std::size_t{0}, 0.05), 0.0);
  EXPECT_EQ(table.Quantile(std::size_t{0}, 0.4), 1.0);
  EXPECT_EQ(table.Quantile("b", 0.75), 0.5);
}

TEST(QuantileTest, UnknownAgent) {
  const QuantileTable table(QuartilePool());
  EXPECT_THROW(table.Quantile("zz", 0.1), Error);
  EXPECT_THROW(table.Quantile(std::size_t{5}, 0.1), Error);
}

TEST(QuantileTest, VectorForms) {
  const QuantileTable table(QuartilePool());
  EXPECT_EQ(table.QuantileVector(std::vector<double>{0.0, 0.5}),
            (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(table.QuantileVector(std::vector<double>{0.4, 0.95}),
            (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(table.QuantileVector(std::vector<double>{0.2, 0.65}),
            (std::vector<double>{0.5, 0.25}));
  EXPECT_THROW(table.QuantileVector(std::vector<double>{0.2}), Error);
}

TEST(QuantileTest, MonotoneAndBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-0.5, 1.5);
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < 50; ++k) rows.push_back({unif(rng), unif(rng)});
  const QuantileTable table(HistoricalPool({"a", "b"}, rows));
  for (int trial = 0; trial < 1000; ++trial) {
    double x = unif(rng), y = unif(rng);
    if (x > y) std::swap(x, y);
    const double qx = table.Quantile(std::size_t{1}, x);
    const double qy = table.Quantile(std::size_t{1}, y);
    EXPECT_LE(qx, qy);
    EXPECT_GE(qx, 0.0);
    EXPECT_LE(qy, 1.0);
  }
}

TEST(StandardizeTest, Examples) {
  EXPECT_EQ(Standardize(std::vector<double>{1, 2, 3}), (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(Standardize(std::vector<double>{0.1, 0.1, 0.1}), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(Standardize(std::vector<double>{4.0}), (std::vector<double>{0.0}));
  EXPECT_THROW(Standardize(std::vector<double>{}), Error);
}

TEST(StandardizeTest, MomentsAndArgmin) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(2 + trial % 10);
    for (auto& x : v) x = unif(rng);
    const auto s = Standardize(v);
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    double ss = 0.0;
    for (double x : s) ss += (x - mean) * (x - mean);
    EXPECT_LE(std::abs(mean), 1e-12);
    EXPECT_NEAR(std::sqrt(ss / static_cast<double>(s.size() - 1)), 1.0, 1e-9);
    EXPECT_EQ(std::min_element(s.begin(), s.end()) - s.begin(),
              std::min_element(v.begin(), v.end()) - v.begin());
  }
}

}  // namespace
}  // namespace dynassign
