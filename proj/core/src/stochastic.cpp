#include "dynassign/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "dynassign/error.hpp"

namespace dynassign {

HistoricalPool::HistoricalPool(std::vector<std::string> agent_ids,
                               std::vector<std::vector<double>> vectors)
    : agent_ids_(std::move(agent_ids)), size_(vectors.size()) {
  if (vectors.empty()) ThrowValidation("historical pool is empty");
  if (agent_ids_.empty()) ThrowValidation("historical pool has no agents");
  values_.reserve(size_ * dim());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != dim()) {
      ThrowValidation("pool vector " + std::to_string(k) + " has length " +
                      std::to_string(vectors[k].size()) + ", expected " +
                      std::to_string(dim()));
    }
    for (double c : vectors[k]) {
      if (!std::isfinite(c)) {
        ThrowValidation("pool vector " + std::to_string(k) +
                        " has a non-finite entry");
      }
    }
    values_.insert(values_.end(), vectors[k].begin(), vectors[k].end());
  }
}

std::uint64_t SplitMix64::Below(std::uint64_t bound) {
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = (*this)();
    if (x >= threshold) return x % bound;
  }
}

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DrawStream::Seed() const {
  return Mix64(Mix64(Mix64(master_seed) ^ item_index) ^ draw_index);
}

void DrawIndices(const HistoricalPool& pool, std::size_t count,
                 const DrawStream& stream, std::vector<std::size_t>& out) {
  if (pool.size() == 0) ThrowValidation("cannot draw from an empty pool");
  out.resize(count);
  SplitMix64 gen = stream.Generator();
  for (auto& idx : out) idx = static_cast<std::size_t>(gen.Below(pool.size()));
}

std::vector<std::vector<double>> DrawSet(const HistoricalPool& pool,
                                         std::size_t count,
                                         const DrawStream& stream) {
  std::vector<std::size_t> idx;
  DrawIndices(pool, count, stream, idx);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t k : idx) {
    auto v = pool.vector(k);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

QuantileTable::QuantileTable(const HistoricalPool& pool)
    : agent_ids_(pool.agent_ids()),
      sorted_(pool.dim()),
      pool_size_(pool.size()) {
  for (std::size_t j = 0; j < pool.dim(); ++j) {
    auto& col = sorted_[j];
    col.reserve(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) col.push_back(pool.vector(k)[j]);
    std::sort(col.begin(), col.end());
  }
}

double QuantileTable::Quantile(std::size_t agent, double cost) const {
  if (agent >= sorted_.size()) {
    ThrowValidation("unknown agent index " + std::to_string(agent));
  }
  const auto& col = sorted_[agent];
  const auto below = std::upper_bound(col.begin(), col.end(), cost) - col.begin();
  return static_cast<double>(below) / static_cast<double>(col.size());
}

double QuantileTable::Quantile(const std::string& agent_id, double cost) const {
  auto it = std::find(agent_ids_.begin(), agent_ids_.end(), agent_id);
  if (it == agent_ids_.end()) ThrowValidation("unknown agent '" + agent_id + "'");
  return Quantile(static_cast<std::size_t>(it - agent_ids_.begin()), cost);
}

std::vector<double> QuantileTable::QuantileVector(
    std::span<const double> costs) const {
  if (costs.size() != sorted_.size()) {
    ThrowValidation("cost vector has length " + std::to_string(costs.size()) +
                    ", expected " + std::to_string(sorted_.size()));
  }
  std::vector<double> q(costs.size());
  for (std::size_t j = 0; j < costs.size(); ++j) q[j] = Quantile(j, costs[j]);
  return q;
}

std::vector<double> Standardize(std::span<const double> costs) {
  if (costs.empty()) ThrowValidation("cannot standardize an empty vector");
  const auto n = static_cast<double>(costs.size());
  std::vector<double> out(costs.size(), 0.0);
  if (costs.size() < 2) return out;
  if (std::all_of(costs.begin(), costs.end(),
                  [&](double c) { return c == costs.front(); })) {
    return out;
  }
  double mean = 0.0;
  for (double c : costs) mean += c;
  mean /= n;
  double ss = 0.0;
  for (double c : costs) ss += (c - mean) * (c - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return out;
  for (std::size_t j = 0; j < costs.size(); ++j) out[j] = (costs[j] - mean) / sd;
  return out;
}

}  // namespace dynassign
