#include "dynassign/batch.hpp"

#include <limits>
#include <map>

#include "dynassign/error.hpp"
#include "parallel.hpp"

namespace dynassign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckBatch(const DynamicState& state, const BatchView& batch) {
  if (batch.vectors.empty()) ThrowValidation("batch is empty");
  if (batch.first_index < 1 || batch.last_index() > batch.total_items) {
    ThrowValidation("batch [" + std::to_string(batch.first_index) + ", " +
                    std::to_string(batch.last_index()) + "] outside horizon of " +
                    std::to_string(batch.total_items));
  }
  for (const auto& v : batch.vectors) {
    if (v.size() != state.agents()) ThrowValidation("batch vector length mismatch");
  }
}

void CheckInner(const MechanismConfig& config) {
  if (config.kind != MechanismKind::kMinRisk &&
      config.kind != MechanismKind::kApproxMinRisk) {
    ThrowValidation(std::string("batch assignment needs min_risk or approx_min_risk, got ") +
                    ToString(config.kind));
  }
}

// Enumerates agent tuples of length `len` in lexicographic order, each agent
// used at most its remaining capacity; the first slot honours exclusions.
void EnumerateTuples(const DynamicState& state, std::size_t len,
                     std::vector<std::vector<int>>& out) {
  std::vector<int> caps(state.remaining().begin(), state.remaining().end());
  std::vector<int> tuple(len);
  auto rec = [&](auto&& self, std::size_t d) -> void {
    if (d == len) {
      out.push_back(tuple);
      return;
    }
    for (std::size_t a = 0; a < caps.size(); ++a) {
      if (caps[a] == 0 || (d == 0 && !state.candidate(a))) continue;
      --caps[a];
      tuple[d] = static_cast<int>(a);
      self(self, d + 1);
      ++caps[a];
    }
  };
  rec(rec, 0);
}

}  // namespace

Recommendation RecommendInBatch(const DynamicState& state,
                                std::span<const double> costs,
                                std::span<const std::vector<double>> later,
                                const HistoricalPool& pool,
                                std::uint64_t item_index, std::size_t total_items,
                                const MechanismConfig& config) {
  CheckInner(config);
  const std::uint64_t batch_end = item_index + later.size();
  if (item_index < 1 || batch_end > total_items) {
    ThrowValidation("batch member outside horizon");
  }
  FutureSpec futures;
  futures.pool = &pool;
  futures.item_index = item_index;
  futures.simulated_count = total_items - batch_end;
  for (const auto& v : later) futures.observed.emplace_back(v);
  return config.kind == MechanismKind::kMinRisk
             ? AssignMinRisk(state, costs, futures, config)
             : AssignApproxMinRisk(state, costs, futures, config);
}

std::vector<Recommendation> AssignBatchApprox(const DynamicState& state,
                                              const BatchView& batch,
                                              const HistoricalPool& pool,
                                              const MechanismConfig& config) {
  CheckInner(config);
  CheckBatch(state, batch);
  DynamicState work = state;
  std::vector<Recommendation> out;
  out.reserve(batch.vectors.size());
  for (std::size_t k = 0; k < batch.vectors.size(); ++k) {
    out.push_back(RecommendInBatch(work, batch.vectors[k], batch.vectors.subspan(k + 1),
                                   pool, batch.first_index + k, batch.total_items,
                                   config));
    work.Commit({}, out.back().chosen_agent, out.back().chosen_agent);
  }
  return out;
}

BatchExactResult AssignBatchExact(const DynamicState& state, const BatchView& batch,
                                  const HistoricalPool& pool,
                                  const MechanismConfig& config) {
  config.Validate();
  CheckBatch(state, batch);
  if (state.closed()) ThrowValidation("assignment state is closed");
  const std::size_t size = batch.vectors.size();
  if (size > kMaxExactBatch) {
    ThrowValidation("exact batch assignment supports at most " +
                    std::to_string(kMaxExactBatch) + " items");
  }
  if (state.TotalRemaining() > kMaxExactUnits) {
    ThrowValidation("exact batch assignment supports at most " +
                    std::to_string(kMaxExactUnits) + " capacity units");
  }
  FutureSpec futures;
  futures.pool = &pool;
  futures.item_index = batch.last_index();
  futures.simulated_count = batch.total_items - batch.last_index();
  if (futures.simulated_count > 0 && pool.dim() != state.agents()) {
    ThrowValidation("pool dimension does not match agent count");
  }
  if (state.TotalRemaining() < static_cast<long>(size + futures.simulated_count)) {
    ThrowInfeasible("remaining capacity cannot absorb the batch and its horizon");
  }

  std::vector<std::vector<int>> tuples;
  EnumerateTuples(state, size, tuples);
  if (tuples.empty()) ThrowInfeasible("no feasible agent tuple for the batch");
  std::vector<double> own(tuples.size(), 0.0);
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    for (std::size_t d = 0; d < size; ++d) {
      own[t] += batch.vectors[d][static_cast<std::size_t>(tuples[t][d])];
    }
  }

  const std::size_t draws = DrawCount(futures, config);
  const std::size_t evaluated = futures.simulated_count == 0 ? 1 : draws;
  std::vector<double> table(evaluated * tuples.size());
  internal::ParallelChunks(
      evaluated, config.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        CapacitatedLap lap;
        std::vector<std::size_t> idx;
        std::vector<const double*> rows;
        std::vector<int> caps(state.agents());
        std::map<std::vector<int>, double> psi;
        for (std::size_t r = begin; r < end; ++r) {
          rows.clear();
          if (futures.simulated_count > 0) {
            SimulatedIndices(futures, config, r, idx);
            for (std::size_t k : idx) rows.push_back(pool.data(k));
          }
          psi.clear();
          for (std::size_t t = 0; t < tuples.size(); ++t) {
            caps.assign(state.remaining().begin(), state.remaining().end());
            for (int a : tuples[t]) --caps[static_cast<std::size_t>(a)];
            auto [it, fresh] = psi.try_emplace(caps, 0.0);
            if (fresh && !rows.empty()) it->second = lap.Solve(rows, caps);
            table[r * tuples.size() + t] = own[t] + it->second;
          }
        }
      });

  BatchExactResult result;
  result.draws_used = static_cast<int>(draws);
  result.expected_cost = kInf;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const double first = table[t];
    double sum = 0.0;
    bool constant = true;
    for (std::size_t r = 0; r < evaluated; ++r) {
      const double v = table[r * tuples.size() + t];
      sum += v;
      constant = constant && v == first;
    }
    const double mean = constant ? first : sum / static_cast<double>(evaluated);
    result.tuples.push_back({tuples[t], mean});
    if (mean < result.expected_cost) {
      result.expected_cost = mean;
      result.agents = tuples[t];
    }
  }

  // Per member: best tuple objective attainable with each agent in its slot.
  for (std::size_t d = 0; d < size; ++d) {
    std::vector<double> best(state.agents(), kInf);
    for (const auto& ts : result.tuples) {
      auto& b = best[static_cast<std::size_t>(ts.agents[d])];
      if (ts.mean_cost < b) b = ts.mean_cost;
    }
    Recommendation rec;
    rec.kind = MechanismKind::kMinRisk;
    rec.chosen_agent = result.agents[d];
    rec.draws_used = result.draws_used;
    for (std::size_t a = 0; a < state.agents(); ++a) {
      if (best[a] < kInf) rec.per_agent_score.push_back({static_cast<int>(a), best[a]});
    }
    result.recommendations.push_back(std::move(rec));
  }
  return result;
}

}  // namespace dynassign
