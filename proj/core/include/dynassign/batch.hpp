#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dynassign/mechanisms.hpp"

namespace dynassign {

// A group of consecutive arrivals whose cost vectors are all observed before
// any of them is assigned. `first_index` is the 1-based arrival index of the
// first member within a horizon of `total_items`.
struct BatchView {
  std::span<const std::vector<double>> vectors;
  std::uint64_t first_index = 1;
  std::size_t total_items = 0;

  std::uint64_t last_index() const { return first_index + vectors.size() - 1; }
};

// Recommendation for one batch member that still has `later` observed
// vectors behind it in its batch. Every future set is the later vectors
// followed by draws for the post-batch items. Dispatches on config.kind,
// which must be min_risk or approx_min_risk.
Recommendation RecommendInBatch(const DynamicState& state,
                                std::span<const double> costs,
                                std::span<const std::vector<double>> later,
                                const HistoricalPool& pool,
                                std::uint64_t item_index, std::size_t total_items,
                                const MechanismConfig& config);

// Assigns the batch members one by one in arrival order with the inner
// mechanism, committing each choice to a working copy of `state` before the
// next member is scored. Returns one Recommendation per member.
std::vector<Recommendation> AssignBatchApprox(const DynamicState& state,
                                              const BatchView& batch,
                                              const HistoricalPool& pool,
                                              const MechanismConfig& config);

inline constexpr std::size_t kMaxExactBatch = 4;
inline constexpr long kMaxExactUnits = 8;

struct TupleScore {
  std::vector<int> agents;
  double mean_cost = 0.0;
};

struct BatchExactResult {
  std::vector<int> agents;  // chosen agent per batch member
  double expected_cost = 0.0;
  std::vector<TupleScore> tuples;  // every feasible tuple, lexicographic order
  std::vector<Recommendation> recommendations;
  int draws_used = 0;
};

// Joint minimum-risk choice for a whole batch by enumeration of agent
// tuples. Each tuple is scored by the batch's own costs plus the optimal
// cost of the post-batch draws on the capacity it leaves, averaged over the
// draws; the first tuple in lexicographic order wins ties. Draw streams are
// keyed on the batch's last arrival index. Small instances only.
BatchExactResult AssignBatchExact(const DynamicState& state, const BatchView& batch,
                                  const HistoricalPool& pool,
                                  const MechanismConfig& config);

}  // namespace dynassign
