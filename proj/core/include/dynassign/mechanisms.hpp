#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynassign/lap.hpp"
#include "dynassign/stochastic.hpp"

namespace dynassign {

enum class MechanismKind {
  kMinRisk,
  kApproxMinRisk,
  kGreedy,
  kWeightedCq,
  kSequentialCq,
  kPredicted,
};

const char* ToString(MechanismKind kind);
MechanismKind ParseMechanismKind(const std::string& name);

// How future cost-vector sets are produced for the simulation mechanisms.
enum class DrawMode {
  kMonteCarlo,  // m sets drawn with replacement from the pool
  kExhaustive,  // every pool-index sequence once (pool^count sets)
};

// How min-risk obtains the per-agent conditional future cost.
enum class SigmaRoute {
  kSensitivity,     // one LAP per draw, then a unit-removal re-route per agent
  kPerAgentSolve,   // one LAP per draw and agent, as written in the algorithm
};

struct MechanismConfig {
  MechanismKind kind = MechanismKind::kGreedy;
  int m = 0;             // draws; 0 selects the kind's default
  double lambda = 0.5;   // weighted_cq only
  int t = 1;             // sequential_cq only
  std::uint64_t seed = 0;
  DrawMode mode = DrawMode::kMonteCarlo;
  SigmaRoute sigma_route = SigmaRoute::kSensitivity;
  int threads = 1;       // draw-level workers; results do not depend on it
  bool use_batches = false;  // backtest: route batch ids through `batch`

  int EffectiveDraws() const;
  void Validate() const;
  std::string Label() const;
};

inline constexpr int kDefaultMinRiskDraws = 1000;
inline constexpr int kDefaultApproxDraws = 5000;
inline constexpr std::size_t kMaxExhaustiveDraws = 1'000'000;

// Per-item record of a committed decision.
struct HistoryEntry {
  std::string item_id;
  int agent = -1;
  int recommended = -1;  // -1 when no recommendation was on record
};

// Remaining capacity per agent plus the append-only decision history.
class DynamicState {
 public:
  DynamicState() = default;
  explicit DynamicState(AgentPool pool);

  const AgentPool& pool() const { return pool_; }
  std::size_t agents() const { return pool_.size(); }
  std::span<const int> remaining() const { return remaining_; }
  int remaining(std::size_t agent) const { return remaining_[agent]; }
  long TotalRemaining() const;
  bool available(std::size_t agent) const { return remaining_[agent] > 0; }
  // Available and not excluded for the current decision.
  bool candidate(std::size_t agent) const {
    return remaining_[agent] > 0 && !excluded_[agent];
  }
  std::vector<int> Candidates() const;
  const std::vector<HistoryEntry>& history() const { return history_; }
  bool closed() const { return closed_; }

  // Copy in which the listed agents cannot receive the current item. Their
  // capacity still counts for simulated future items.
  DynamicState WithExcluded(std::span<const int> agents) const;

  void Commit(std::string item_id, int agent, int recommended = -1);
  void Close() { closed_ = true; }

 private:
  AgentPool pool_;
  std::vector<int> remaining_;
  std::vector<std::uint8_t> excluded_;
  std::vector<HistoryEntry> history_;
  bool closed_ = false;
};

struct AgentScore {
  int agent = -1;
  double score = 0.0;
};

struct Recommendation {
  MechanismKind kind = MechanismKind::kGreedy;
  int chosen_agent = -1;
  // sigma-bar for min-risk, vote share for approx, f_ij for weighted_cq,
  // quantile for sequential_cq, cost for greedy, probability for predicted.
  // Covers exactly the candidate agents, in agent order.
  std::vector<AgentScore> per_agent_score;
  // Standard error of each per_agent_score entry (min-risk only).
  std::vector<double> score_stderr;
  std::optional<double> expected_loss_estimate;
  int draws_used = 0;
};

// Futures considered when assigning one item: observed vectors of later
// items that are already known (dynamic batches) followed by
// `simulated_count` draws from the pool. `item_index` keys the draw streams.
struct FutureSpec {
  std::vector<std::span<const double>> observed;
  std::size_t simulated_count = 0;
  const HistoricalPool* pool = nullptr;
  std::uint64_t item_index = 0;
};

// One-by-one sequential context: the arriving item is `item_index` (1-based)
// of `total_items`.
struct ArrivalContext {
  std::uint64_t item_index = 1;
  std::size_t total_items = 1;
};

Recommendation AssignGreedy(const DynamicState& state,
                            std::span<const double> costs);

Recommendation AssignMinRisk(const DynamicState& state,
                             std::span<const double> costs,
                             const HistoricalPool& pool,
                             const ArrivalContext& arrival,
                             const MechanismConfig& config);

Recommendation AssignMinRisk(const DynamicState& state,
                             std::span<const double> costs,
                             const FutureSpec& futures,
                             const MechanismConfig& config);

Recommendation AssignApproxMinRisk(const DynamicState& state,
                                   std::span<const double> costs,
                                   const HistoricalPool& pool,
                                   const ArrivalContext& arrival,
                                   const MechanismConfig& config);

Recommendation AssignApproxMinRisk(const DynamicState& state,
                                   std::span<const double> costs,
                                   const FutureSpec& futures,
                                   const MechanismConfig& config);

Recommendation AssignWeightedCq(const DynamicState& state,
                                std::span<const double> costs,
                                std::span<const double> quantiles,
                                double lambda);

Recommendation AssignSequentialCq(const DynamicState& state,
                                  std::span<const double> costs,
                                  std::span<const double> quantiles, int t);

struct StaticAssignment {
  std::vector<int> item_agent;
  double total_cost = 0.0;
};

// Optimal static assignment of a whole cohort: expand_capacity + solve.
StaticAssignment StaticOptimalAssign(
    const std::vector<std::vector<double>>& cohort, const AgentPool& pool);

// Per-draw conditional totals sigma[r][a] = c_a + Psi^r_{i+1} without one
// unit of a, for every available agent a (+inf for unavailable agents).
struct SigmaTable {
  std::size_t draws = 0;
  std::size_t agents = 0;
  std::vector<double> values;  // draws x agents

  double at(std::size_t r, std::size_t a) const { return values[r * agents + a]; }
};

SigmaTable ComputeSigmaTable(const DynamicState& state,
                             std::span<const double> costs,
                             const FutureSpec& futures,
                             const MechanismConfig& config);

// Estimated risk of choosing `chosen`: sigma-bar of the choice minus the mean
// over draws of the unconstrained optimum min_a sigma[r][a]. Uses the same
// draws as the decision.
double EstimateExpectedLoss(const SigmaTable& sigma, int chosen);

// Number of future sets a mechanism evaluates for `futures` under `config`.
std::size_t DrawCount(const FutureSpec& futures, const MechanismConfig& config);

// Pool indices of the r-th simulated set.
void SimulatedIndices(const FutureSpec& futures, const MechanismConfig& config,
                      std::size_t r, std::vector<std::size_t>& out);

}  // namespace dynassign
