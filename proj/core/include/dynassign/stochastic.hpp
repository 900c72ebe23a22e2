#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dynassign {

// Empirical stand-in for the cost-vector distribution: a nonempty set of
// historical cost vectors over a fixed, ordered list of agents.
class HistoricalPool {
 public:
  HistoricalPool() = default;
  HistoricalPool(std::vector<std::string> agent_ids,
                 std::vector<std::vector<double>> vectors);

  std::size_t size() const { return size_; }
  std::size_t dim() const { return agent_ids_.size(); }
  const std::vector<std::string>& agent_ids() const { return agent_ids_; }
  std::span<const double> vector(std::size_t k) const {
    return {values_.data() + k * dim(), dim()};
  }
  const double* data(std::size_t k) const { return values_.data() + k * dim(); }

 private:
  std::vector<std::string> agent_ids_;
  std::vector<double> values_;
  std::size_t size_ = 0;
};

// SplitMix64 (Steele, Lea & Flood). Small, fast and fully specified, so a
// stream can be reconstructed from its seed on any platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t Below(std::uint64_t bound);

  // Uniform double in [0, 1) from the top 53 bits.
  double Uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// The finalizer of SplitMix64 applied to one 64-bit word.
std::uint64_t Mix64(std::uint64_t x);

// Addresses the r-th simulated future set for one arriving item. The seed of
// the stream is
//   Mix64(Mix64(Mix64(master_seed) ^ item_index) ^ draw_index)
// so any single draw can be replayed in isolation.
struct DrawStream {
  std::uint64_t master_seed = 0;
  std::uint64_t item_index = 0;
  std::uint64_t draw_index = 0;

  std::uint64_t Seed() const;
  SplitMix64 Generator() const { return SplitMix64(Seed()); }
};

// `count` pool row indices drawn uniformly with replacement.
void DrawIndices(const HistoricalPool& pool, std::size_t count,
                 const DrawStream& stream, std::vector<std::size_t>& out);

std::vector<std::vector<double>> DrawSet(const HistoricalPool& pool,
                                         std::size_t count,
                                         const DrawStream& stream);

// Per-agent sorted historical costs. quantile(j, c) is the right-continuous
// empirical CDF: the fraction of agent j's historical costs that are <= c.
class QuantileTable {
 public:
  QuantileTable() = default;
  explicit QuantileTable(const HistoricalPool& pool);

  std::size_t agents() const { return sorted_.size(); }
  std::size_t pool_size() const { return pool_size_; }
  const std::vector<std::string>& agent_ids() const { return agent_ids_; }
  std::span<const double> sorted_costs(std::size_t agent) const {
    return sorted_[agent];
  }

  double Quantile(std::size_t agent, double cost) const;
  double Quantile(const std::string& agent_id, double cost) const;
  std::vector<double> QuantileVector(std::span<const double> costs) const;

 private:
  std::vector<std::string> agent_ids_;
  std::vector<std::vector<double>> sorted_;
  std::size_t pool_size_ = 0;
};

// Per-item z-score using the sample standard deviation (divisor n-1). A
// constant vector, or a single entry, maps to zeros.
std::vector<double> Standardize(std::span<const double> costs);

}  // namespace dynassign
