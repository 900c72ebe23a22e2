#include "dynassign/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dynassign/error.hpp"
#include "parallel.hpp"

namespace dynassign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckArrival(const DynamicState& state, std::span<const double> costs) {
  if (costs.size() != state.agents()) {
    ThrowValidation("arrival vector has length " + std::to_string(costs.size()) +
                    ", expected " + std::to_string(state.agents()));
  }
  for (double c : costs) {
    if (!std::isfinite(c)) ThrowValidation("arrival vector has a non-finite entry");
  }
  if (state.closed()) ThrowValidation("assignment state is closed");
  if (state.Candidates().empty()) {
    ThrowInfeasible("no agent with remaining capacity");
  }
}

void CheckFutures(const DynamicState& state, const FutureSpec& futures) {
  if (futures.simulated_count > 0) {
    if (futures.pool == nullptr || futures.pool->size() == 0) {
      ThrowValidation("simulation requires a nonempty historical pool");
    }
    if (futures.pool->dim() != state.agents()) {
      ThrowValidation("pool dimension does not match agent count");
    }
  }
  for (const auto& v : futures.observed) {
    if (v.size() != state.agents()) ThrowValidation("observed vector length mismatch");
  }
  const long horizon = static_cast<long>(futures.observed.size() +
                                         futures.simulated_count);
  if (state.TotalRemaining() < horizon + 1) {
    ThrowInfeasible("remaining capacity " + std::to_string(state.TotalRemaining()) +
                    " cannot absorb the arrival plus " + std::to_string(horizon) +
                    " future items");
  }
}

FutureSpec HorizonFutures(const HistoricalPool& pool, const ArrivalContext& arrival) {
  if (arrival.item_index < 1 || arrival.item_index > arrival.total_items) {
    ThrowValidation("item index " + std::to_string(arrival.item_index) +
                    " outside horizon of " + std::to_string(arrival.total_items));
  }
  FutureSpec spec;
  spec.pool = &pool;
  spec.item_index = arrival.item_index;
  spec.simulated_count = arrival.total_items - arrival.item_index;
  return spec;
}

struct Workspace {
  CapacitatedLap lap;
  std::vector<const double*> rows;
  std::vector<std::size_t> indices;
  std::vector<double> deltas;
  std::vector<int> caps;
};

void FillRows(const FutureSpec& futures, const MechanismConfig& config,
              std::size_t r, const double* head, Workspace& ws) {
  ws.rows.clear();
  if (head != nullptr) ws.rows.push_back(head);
  for (const auto& v : futures.observed) ws.rows.push_back(v.data());
  if (futures.simulated_count > 0) {
    SimulatedIndices(futures, config, r, ws.indices);
    for (std::size_t k : ws.indices) ws.rows.push_back(futures.pool->data(k));
  }
}

int ArgMinCandidate(const DynamicState& state, std::span<const double> values) {
  int best = -1;
  for (std::size_t a = 0; a < state.agents(); ++a) {
    if (!state.candidate(a)) continue;
    if (best < 0 || values[a] < values[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(a);
    }
  }
  return best;
}

}  // namespace

const char* ToString(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kMinRisk:
      return "min_risk";
    case MechanismKind::kApproxMinRisk:
      return "approx_min_risk";
    case MechanismKind::kGreedy:
      return "greedy";
    case MechanismKind::kWeightedCq:
      return "weighted_cq";
    case MechanismKind::kSequentialCq:
      return "sequential_cq";
    case MechanismKind::kPredicted:
      return "predicted";
  }
  return "unknown";
}

MechanismKind ParseMechanismKind(const std::string& name) {
  if (name == "min_risk") return MechanismKind::kMinRisk;
  if (name == "approx_min_risk" || name == "approx") return MechanismKind::kApproxMinRisk;
  if (name == "greedy") return MechanismKind::kGreedy;
  if (name == "weighted_cq") return MechanismKind::kWeightedCq;
  if (name == "sequential_cq") return MechanismKind::kSequentialCq;
  if (name == "predicted") return MechanismKind::kPredicted;
  ThrowValidation("unknown mechanism '" + name + "'");
}

int MechanismConfig::EffectiveDraws() const {
  if (m > 0) return m;
  switch (kind) {
    case MechanismKind::kMinRisk:
      return kDefaultMinRiskDraws;
    case MechanismKind::kApproxMinRisk:
      return kDefaultApproxDraws;
    case MechanismKind::kPredicted:
      return 20;
    default:
      return 0;
  }
}

void MechanismConfig::Validate() const {
  if (m < 0) ThrowValidation("m must be >= 1 (or 0 for the default)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) ThrowValidation("lambda must lie in [0, 1]");
  if (t < 1) ThrowValidation("t must be a positive integer");
  if (threads < 1) ThrowValidation("threads must be >= 1");
}

std::string MechanismConfig::Label() const {
  std::ostringstream os;
  os << ToString(kind);
  if (kind == MechanismKind::kWeightedCq) os << "(lambda=" << lambda << ")";
  if (kind == MechanismKind::kSequentialCq) os << "(t=" << t << ")";
  if (use_batches) os << "+batch";
  return os.str();
}

DynamicState::DynamicState(AgentPool pool)
    : pool_(std::move(pool)),
      remaining_(pool_.capacities),
      excluded_(pool_.size(), 0) {}

long DynamicState::TotalRemaining() const {
  long total = 0;
  for (int z : remaining_) total += z;
  return total;
}

std::vector<int> DynamicState::Candidates() const {
  std::vector<int> out;
  for (std::size_t a = 0; a < agents(); ++a) {
    if (candidate(a)) out.push_back(static_cast<int>(a));
  }
  return out;
}

DynamicState DynamicState::WithExcluded(std::span<const int> agents_out) const {
  DynamicState copy = *this;
  for (int a : agents_out) {
    if (a < 0 || static_cast<std::size_t>(a) >= agents()) {
      ThrowValidation("excluded agent index out of range");
    }
    copy.excluded_[static_cast<std::size_t>(a)] = 1;
  }
  return copy;
}

void DynamicState::Commit(std::string item_id, int agent, int recommended) {
  if (closed_) ThrowValidation("assignment state is closed");
  if (agent < 0 || static_cast<std::size_t>(agent) >= agents()) {
    ThrowValidation("agent index out of range");
  }
  auto& z = remaining_[static_cast<std::size_t>(agent)];
  if (z <= 0) {
    ThrowInfeasible("agent '" + pool_.agents[static_cast<std::size_t>(agent)] +
                    "' has no remaining capacity");
  }
  --z;
  std::fill(excluded_.begin(), excluded_.end(), 0);
  history_.push_back({std::move(item_id), agent, recommended});
}

std::size_t DrawCount(const FutureSpec& futures, const MechanismConfig& config) {
  if (config.mode == DrawMode::kMonteCarlo) {
    const int m = config.EffectiveDraws();
    if (m < 1) ThrowValidation("simulation mechanisms need m >= 1");
    return static_cast<std::size_t>(m);
  }
  std::size_t total = 1;
  const std::size_t base = futures.simulated_count > 0 ? futures.pool->size() : 1;
  for (std::size_t k = 0; k < futures.simulated_count; ++k) {
    total *= base;
    if (total > kMaxExhaustiveDraws) {
      ThrowValidation("exhaustive enumeration exceeds " +
                      std::to_string(kMaxExhaustiveDraws) + " future sets");
    }
  }
  return total;
}

void SimulatedIndices(const FutureSpec& futures, const MechanismConfig& config,
                      std::size_t r, std::vector<std::size_t>& out) {
  if (config.mode == DrawMode::kMonteCarlo) {
    DrawIndices(*futures.pool, futures.simulated_count,
                DrawStream{config.seed, futures.item_index, r}, out);
    return;
  }
  // Base-|pool| digits of r, most significant first.
  const std::size_t base = futures.pool->size();
  out.assign(futures.simulated_count, 0);
  for (std::size_t k = futures.simulated_count; k-- > 0;) {
    out[k] = r % base;
    r /= base;
  }
}

SigmaTable ComputeSigmaTable(const DynamicState& state,
                             std::span<const double> costs,
                             const FutureSpec& futures,
                             const MechanismConfig& config) {
  CheckArrival(state, costs);
  CheckFutures(state, futures);
  const std::size_t n = state.agents();
  SigmaTable table;
  table.draws = DrawCount(futures, config);
  table.agents = n;
  table.values.assign(table.draws * n, kInf);

  auto evaluate = [&](std::size_t r, Workspace& ws) {
    double* out = table.values.data() + r * n;
    FillRows(futures, config, r, nullptr, ws);
    if (ws.rows.empty()) {
      for (std::size_t a = 0; a < n; ++a) {
        if (state.available(a)) out[a] = costs[a];
      }
      return;
    }
    if (config.sigma_route == SigmaRoute::kSensitivity) {
      const double psi = ws.lap.Solve(ws.rows, state.remaining());
      ws.deltas.resize(n);
      ws.lap.UnitRemovalDeltas(ws.deltas);
      for (std::size_t a = 0; a < n; ++a) {
        if (state.available(a)) out[a] = costs[a] + (psi + ws.deltas[a]);
      }
    } else {
      ws.caps.assign(state.remaining().begin(), state.remaining().end());
      for (std::size_t a = 0; a < n; ++a) {
        if (!state.available(a)) continue;
        --ws.caps[a];
        out[a] = costs[a] + ws.lap.Solve(ws.rows, ws.caps);
        ++ws.caps[a];
      }
    }
  };

  if (futures.simulated_count == 0) {
    // Every draw sees the same future set.
    Workspace ws;
    evaluate(0, ws);
    for (std::size_t r = 1; r < table.draws; ++r) {
      std::copy_n(table.values.begin(), n, table.values.begin() + static_cast<long>(r * n));
    }
    return table;
  }
  internal::ParallelChunks(table.draws, config.threads,
                           [&](std::size_t, std::size_t begin, std::size_t end) {
                             Workspace ws;
                             for (std::size_t r = begin; r < end; ++r) evaluate(r, ws);
                           });
  return table;
}

double EstimateExpectedLoss(const SigmaTable& sigma, int chosen) {
  if (chosen < 0 || static_cast<std::size_t>(chosen) >= sigma.agents) {
    ThrowValidation("chosen agent out of range");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < sigma.draws; ++r) {
    double best = kInf;
    for (std::size_t a = 0; a < sigma.agents; ++a) best = std::min(best, sigma.at(r, a));
    total += sigma.at(r, static_cast<std::size_t>(chosen)) - best;
  }
  return total / static_cast<double>(sigma.draws);
}

Recommendation AssignGreedy(const DynamicState& state,
                            std::span<const double> costs) {
  CheckArrival(state, costs);
  Recommendation rec;
  rec.kind = MechanismKind::kGreedy;
  rec.chosen_agent = ArgMinCandidate(state, costs);
  for (int a : state.Candidates()) {
    rec.per_agent_score.push_back({a, costs[static_cast<std::size_t>(a)]});
  }
  return rec;
}

Recommendation AssignMinRisk(const DynamicState& state,
                             std::span<const double> costs,
                             const HistoricalPool& pool,
                             const ArrivalContext& arrival,
                             const MechanismConfig& config) {
  return AssignMinRisk(state, costs, HorizonFutures(pool, arrival), config);
}

Recommendation AssignMinRisk(const DynamicState& state,
                             std::span<const double> costs,
                             const FutureSpec& futures,
                             const MechanismConfig& config) {
  config.Validate();
  const SigmaTable sigma = ComputeSigmaTable(state, costs, futures, config);
  const std::size_t n = state.agents();
  const auto draws = static_cast<double>(sigma.draws);
  std::vector<double> mean(n, kInf);
  Recommendation rec;
  rec.kind = MechanismKind::kMinRisk;
  rec.draws_used = static_cast<int>(sigma.draws);
  for (std::size_t a = 0; a < n; ++a) {
    if (!state.candidate(a)) continue;
    double sum = 0.0;
    bool constant = true;
    for (std::size_t r = 0; r < sigma.draws; ++r) {
      sum += sigma.at(r, a);
      constant = constant && sigma.at(r, a) == sigma.at(0, a);
    }
    // A constant column averages to itself, not to a rounded sum / m.
    mean[a] = constant ? sigma.at(0, a) : sum / draws;
    double ss = 0.0;
    for (std::size_t r = 0; r < sigma.draws; ++r) {
      const double d = sigma.at(r, a) - mean[a];
      ss += d * d;
    }
    const double se = sigma.draws > 1 ? std::sqrt(ss / (draws - 1.0) / draws) : 0.0;
    rec.per_agent_score.push_back({static_cast<int>(a), mean[a]});
    rec.score_stderr.push_back(se);
  }
  rec.chosen_agent = ArgMinCandidate(state, mean);
  rec.expected_loss_estimate = EstimateExpectedLoss(sigma, rec.chosen_agent);
  return rec;
}

Recommendation AssignApproxMinRisk(const DynamicState& state,
                                   std::span<const double> costs,
                                   const HistoricalPool& pool,
                                   const ArrivalContext& arrival,
                                   const MechanismConfig& config) {
  return AssignApproxMinRisk(state, costs, HorizonFutures(pool, arrival), config);
}

Recommendation AssignApproxMinRisk(const DynamicState& state,
                                   std::span<const double> costs,
                                   const FutureSpec& futures,
                                   const MechanismConfig& config) {
  config.Validate();
  CheckArrival(state, costs);
  CheckFutures(state, futures);
  const std::size_t n = state.agents();
  const std::size_t draws = DrawCount(futures, config);
  std::vector<int> winner(draws, -1);
  std::vector<double> total(draws, 0.0);
  std::vector<std::uint8_t> allowed(n);
  for (std::size_t a = 0; a < n; ++a) allowed[a] = state.candidate(a) ? 1 : 0;

  auto evaluate = [&](std::size_t r, Workspace& ws) {
    FillRows(futures, config, r, costs.data(), ws);
    total[r] = ws.lap.Solve(ws.rows, state.remaining(), allowed);
    winner[r] = ws.lap.row_agent()[0];
  };
  if (futures.simulated_count == 0) {
    Workspace ws;
    evaluate(0, ws);
    std::fill(winner.begin(), winner.end(), winner[0]);
    std::fill(total.begin(), total.end(), total[0]);
  } else {
    internal::ParallelChunks(draws, config.threads,
                             [&](std::size_t, std::size_t begin, std::size_t end) {
                               Workspace ws;
                               for (std::size_t r = begin; r < end; ++r) evaluate(r, ws);
                             });
  }

  std::vector<long> votes(n, 0);
  std::vector<double> cost_sum(n, 0.0);
  for (std::size_t r = 0; r < draws; ++r) {
    const auto a = static_cast<std::size_t>(winner[r]);
    ++votes[a];
    cost_sum[a] += total[r];
  }
  // Mode; ties go to the lower mean total cost over winning draws, then to
  // the lower agent index.
  int chosen = -1;
  double chosen_mean = kInf;
  for (std::size_t a = 0; a < n; ++a) {
    if (!state.candidate(a) || votes[a] == 0) continue;
    const double mean_cost = cost_sum[a] / static_cast<double>(votes[a]);
    const auto best = chosen < 0 ? 0L : votes[static_cast<std::size_t>(chosen)];
    if (chosen < 0 || votes[a] > best || (votes[a] == best && mean_cost < chosen_mean)) {
      chosen = static_cast<int>(a);
      chosen_mean = mean_cost;
    }
  }
  Recommendation rec;
  rec.kind = MechanismKind::kApproxMinRisk;
  rec.chosen_agent = chosen;
  rec.draws_used = static_cast<int>(draws);
  for (std::size_t a = 0; a < n; ++a) {
    if (!state.candidate(a)) continue;
    rec.per_agent_score.push_back(
        {static_cast<int>(a), static_cast<double>(votes[a]) / static_cast<double>(draws)});
  }
  return rec;
}

Recommendation AssignWeightedCq(const DynamicState& state,
                                std::span<const double> costs,
                                std::span<const double> quantiles,
                                double lambda) {
  CheckArrival(state, costs);
  if (quantiles.size() != costs.size()) ThrowValidation("quantile vector length mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) ThrowValidation("lambda must lie in [0, 1]");
  const std::vector<double> standardized = Standardize(costs);
  std::vector<double> f(costs.size());
  for (std::size_t a = 0; a < costs.size(); ++a) {
    f[a] = lambda * standardized[a] + (1.0 - lambda) * quantiles[a];
  }
  Recommendation rec;
  rec.kind = MechanismKind::kWeightedCq;
  rec.chosen_agent = ArgMinCandidate(state, f);
  for (int a : state.Candidates()) rec.per_agent_score.push_back({a, f[static_cast<std::size_t>(a)]});
  return rec;
}

Recommendation AssignSequentialCq(const DynamicState& state,
                                  std::span<const double> costs,
                                  std::span<const double> quantiles, int t) {
  CheckArrival(state, costs);
  if (quantiles.size() != costs.size()) ThrowValidation("quantile vector length mismatch");
  if (t < 1) ThrowValidation("t must be a positive integer");
  std::vector<int> order = state.Candidates();
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return costs[static_cast<std::size_t>(x)] < costs[static_cast<std::size_t>(y)];
  });
  order.resize(std::min(order.size(), static_cast<std::size_t>(t)));
  int chosen = order.front();
  for (int a : order) {
    const auto au = static_cast<std::size_t>(a);
    const auto cu = static_cast<std::size_t>(chosen);
    if (quantiles[au] < quantiles[cu] ||
        (quantiles[au] == quantiles[cu] &&
         (costs[au] < costs[cu] || (costs[au] == costs[cu] && a < chosen)))) {
      chosen = a;
    }
  }
  Recommendation rec;
  rec.kind = MechanismKind::kSequentialCq;
  rec.chosen_agent = chosen;
  for (int a : state.Candidates()) {
    rec.per_agent_score.push_back({a, quantiles[static_cast<std::size_t>(a)]});
  }
  return rec;
}

StaticAssignment StaticOptimalAssign(const std::vector<std::vector<double>>& cohort,
                                     const AgentPool& pool) {
  StaticAssignment out;
  if (cohort.empty()) return out;
  const ExpandedMatrix expanded = ExpandCapacity(CostMatrix::FromRows(cohort), pool);
  const Assignment assignment = Solve(expanded.matrix);
  out.item_agent.resize(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    out.item_agent[i] =
        expanded.unit_to_agent[static_cast<std::size_t>(assignment.row_to_col[i])];
  }
  out.total_cost = assignment.total_cost;
  return out;
}

}  // namespace dynassign
