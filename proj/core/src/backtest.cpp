#include "dynassign/backtest.hpp"

#include <cmath>
#include <istream>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <sstream>

#include "dynassign/batch.hpp"
#include "dynassign/error.hpp"
#include "parallel.hpp"

namespace dynassign {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kDefaultPredictorRuns = 20;

struct Replay {
  double total_cost = 0.0;
  double loss_total = 0.0;
  bool has_loss = false;
  std::vector<TraceEntry> trace;
};

bool IsSimulation(MechanismKind kind) {
  return kind == MechanismKind::kMinRisk || kind == MechanismKind::kApproxMinRisk;
}

std::string Parameter(const MechanismConfig& config) {
  std::ostringstream os;
  switch (config.kind) {
    case MechanismKind::kMinRisk:
    case MechanismKind::kApproxMinRisk:
      os << "m=" << config.EffectiveDraws();
      break;
    case MechanismKind::kPredicted:
      os << "m=" << (config.m > 0 ? config.m : kDefaultPredictorRuns);
      break;
    case MechanismKind::kWeightedCq:
      os << "lambda=" << config.lambda;
      break;
    case MechanismKind::kSequentialCq:
      os << "t=" << config.t;
      break;
    case MechanismKind::kGreedy:
      break;
  }
  return os.str();
}

class ReplayContext {
 public:
  ReplayContext(const Cohort& cohort, const HistoricalPool& pool,
                const QuantileTable& table, const AgentPool& agents)
      : cohort_(cohort), pool_(pool), table_(table), agents_(agents) {}

  Replay Run(const MechanismConfig& config, const Ensemble* ensemble) const {
    DynamicState state(agents_);
    Replay out;
    const std::size_t n = cohort_.size();
    const bool batched = config.use_batches && cohort_.has_batches();
    std::size_t i = 0;
    while (i < n) {
      std::size_t end = i + 1;
      if (batched) {
        while (end < n && cohort_.batch_ids[end] == cohort_.batch_ids[i]) ++end;
      }
      if (batched && end - i > 1) {
        const BatchView view{
            std::span<const std::vector<double>>(cohort_.vectors).subspan(i, end - i),
            static_cast<std::uint64_t>(i + 1), n};
        const auto recs = AssignBatchApprox(state, view, pool_, config);
        for (std::size_t k = 0; k < recs.size(); ++k) Record(state, i + k, recs[k], out);
      } else {
        Record(state, i, Recommend(state, i, config, ensemble), out);
      }
      i = end;
    }
    return out;
  }

 private:
  Recommendation Recommend(const DynamicState& state, std::size_t i,
                           const MechanismConfig& config, const Ensemble* ensemble) const {
    const auto& costs = cohort_.vectors[i];
    const ArrivalContext arrival{static_cast<std::uint64_t>(i + 1), cohort_.size()};
    switch (config.kind) {
      case MechanismKind::kMinRisk:
        return AssignMinRisk(state, costs, pool_, arrival, config);
      case MechanismKind::kApproxMinRisk:
        return AssignApproxMinRisk(state, costs, pool_, arrival, config);
      case MechanismKind::kGreedy:
        return AssignGreedy(state, costs);
      case MechanismKind::kWeightedCq:
        return AssignWeightedCq(state, costs, table_.QuantileVector(costs), config.lambda);
      case MechanismKind::kSequentialCq:
        return AssignSequentialCq(state, costs, table_.QuantileVector(costs), config.t);
      case MechanismKind::kPredicted:
        return AssignPredicted(state, costs, table_.QuantileVector(costs), *ensemble);
    }
    ThrowValidation("unknown mechanism");
  }

  void Record(DynamicState& state, std::size_t i, const Recommendation& rec,
              Replay& out) const {
    const auto& costs = cohort_.vectors[i];
    TraceEntry entry;
    entry.ordinal = i + 1;
    entry.item_id = cohort_.item_ids[i];
    entry.agent = rec.chosen_agent;
    entry.greedy_agent = AssignGreedy(state, costs).chosen_agent;
    entry.cost = costs[static_cast<std::size_t>(rec.chosen_agent)];
    entry.expected_loss = rec.expected_loss_estimate;
    state.Commit(entry.item_id, rec.chosen_agent, rec.chosen_agent);
    entry.remaining.assign(state.remaining().begin(), state.remaining().end());
    out.total_cost += entry.cost;
    if (rec.expected_loss_estimate) {
      out.loss_total += *rec.expected_loss_estimate;
      out.has_loss = true;
    }
    out.trace.push_back(std::move(entry));
  }

  const Cohort& cohort_;
  const HistoricalPool& pool_;
  const QuantileTable& table_;
  const AgentPool& agents_;
};

void CheckInputs(const Cohort& cohort, const HistoricalPool& pool, const AgentPool& agents) {
  if (cohort.size() == 0) ThrowValidation("cohort is empty");
  if (cohort.item_ids.size() != cohort.size()) {
    ThrowValidation("cohort item ids do not match its vectors");
  }
  if (cohort.has_batches() && cohort.batch_ids.size() != cohort.size()) {
    ThrowValidation("cohort batch ids do not match its vectors");
  }
  if (pool.agent_ids() != agents.agents) {
    ThrowValidation("pool agents differ from the capacity agents");
  }
  for (const auto& v : cohort.vectors) {
    if (v.size() != agents.size()) ThrowValidation("cohort vector length differs from n'");
    for (double c : v) {
      if (!std::isfinite(c)) ThrowValidation("cohort contains a non-finite cost");
    }
  }
  if (agents.TotalCapacity() < static_cast<long>(cohort.size())) {
    ThrowInfeasible("total capacity " + std::to_string(agents.TotalCapacity()) +
                    " is below the cohort size " + std::to_string(cohort.size()));
  }
}

MechanismRun OptimalRun(const Cohort& cohort, const AgentPool& agents) {
  const StaticAssignment opt = StaticOptimalAssign(cohort.vectors, agents);
  MechanismRun run;
  run.label = "optimal";
  run.seeds = {0};
  std::vector<int> remaining = agents.capacities;
  double total = 0.0;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    TraceEntry e;
    e.ordinal = i + 1;
    e.item_id = cohort.item_ids[i];
    e.agent = opt.item_agent[i];
    e.cost = cohort.vectors[i][static_cast<std::size_t>(e.agent)];
    --remaining[static_cast<std::size_t>(e.agent)];
    e.remaining = remaining;
    total += e.cost;
    run.trace.push_back(std::move(e));
  }
  run.total_costs = {total};
  return run;
}

Json AgentName(const std::vector<std::string>& ids, int agent) {
  return agent < 0 ? Json(nullptr) : Json(ids[static_cast<std::size_t>(agent)]);
}

Json TraceJson(const TraceEntry& e, const std::vector<std::string>& ids, bool with_greedy) {
  Json j;
  j["ordinal"] = e.ordinal;
  j["item_id"] = e.item_id;
  j["agent"] = AgentName(ids, e.agent);
  if (with_greedy) j["greedy_agent"] = AgentName(ids, e.greedy_agent);
  j["cost"] = e.cost;
  if (e.expected_loss) j["expected_loss"] = *e.expected_loss;
  j["remaining"] = e.remaining;
  return j;
}

Json RunJson(const MechanismRun& run, const BacktestResult& result, bool dynamic) {
  Json j;
  j["label"] = run.label;
  j["kind"] = dynamic ? ToString(run.config.kind) : "optimal";
  j["parameter"] = run.parameter;
  if (dynamic) j["batches"] = run.config.use_batches;
  j["mean_total_cost"] = run.MeanTotalCost();
  j["mean_score"] = run.MeanScore(result.items);
  j["ci_half_width"] = run.CiHalfWidth(result.items);
  if (run.HasExpectedLoss()) j["mean_expected_loss_total"] = run.MeanExpectedLoss();
  Json reps = Json::array();
  for (std::size_t r = 0; r < run.total_costs.size(); ++r) {
    Json rep;
    rep["seed"] = run.seeds[r];
    rep["total_cost"] = run.total_costs[r];
    if (run.HasExpectedLoss()) rep["expected_loss_total"] = run.expected_loss_totals[r];
    reps.push_back(std::move(rep));
  }
  j["replications"] = std::move(reps);
  Json trace = Json::array();
  for (const auto& e : run.trace) trace.push_back(TraceJson(e, result.agent_ids, dynamic));
  j["trace"] = std::move(trace);
  return j;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

double MechanismRun::MeanTotalCost() const {
  if (total_costs.empty()) return 0.0;
  double s = 0.0;
  for (double c : total_costs) s += c;
  return s / static_cast<double>(total_costs.size());
}

double MechanismRun::MeanScore(std::size_t items) const {
  return 1.0 - MeanTotalCost() / static_cast<double>(items);
}

double MechanismRun::CiHalfWidth(std::size_t items) const {
  const std::size_t r = total_costs.size();
  if (r < 2) return 0.0;
  const double mean = MeanTotalCost();
  double ss = 0.0;
  for (double c : total_costs) ss += (c - mean) * (c - mean);
  const double sd = std::sqrt(ss / static_cast<double>(r - 1)) / static_cast<double>(items);
  return 1.96 * sd / std::sqrt(static_cast<double>(r));
}

double MechanismRun::MeanExpectedLoss() const {
  if (expected_loss_totals.empty()) return 0.0;
  double s = 0.0;
  for (double c : expected_loss_totals) s += c;
  return s / static_cast<double>(expected_loss_totals.size());
}

std::uint64_t MechanismSeed(std::uint64_t master, const std::string& label,
                            std::size_t index, int rep) {
  return Mix64(Mix64(Mix64(master) ^ Fnv1a64(label) ^ index) ^
               static_cast<std::uint64_t>(rep));
}

BacktestResult RunBacktest(const Cohort& cohort, const HistoricalPool& pool,
                           const AgentPool& agents,
                           const std::vector<MechanismConfig>& configs,
                           const BacktestOptions& options) {
  CheckInputs(cohort, pool, agents);
  if (options.replications < 1) ThrowValidation("replications must be >= 1");
  if (options.threads < 1) ThrowValidation("threads must be >= 1");
  for (const auto& c : configs) {
    c.Validate();
    if (c.use_batches && !IsSimulation(c.kind)) {
      ThrowValidation("batches need min_risk or approx_min_risk, got " +
                      std::string(ToString(c.kind)));
    }
  }

  BacktestResult result;
  result.agent_ids = agents.agents;
  result.capacities = agents.capacities;
  result.items = cohort.size();
  result.seed = options.seed;
  result.replications = options.replications;
  result.optimal = OptimalRun(cohort, agents);

  const QuantileTable table(pool);
  const ReplayContext replay(cohort, pool, table, agents);

  // Greedy is deterministic, so one replication stands for all of them.
  MechanismConfig greedy_config;
  greedy_config.kind = MechanismKind::kGreedy;
  {
    Replay g = replay.Run(greedy_config, nullptr);
    result.greedy.label = "greedy";
    result.greedy.config = greedy_config;
    result.greedy.seeds = {0};
    result.greedy.total_costs = {g.total_cost};
    result.greedy.trace = std::move(g.trace);
  }

  const auto reps = static_cast<std::size_t>(options.replications);
  result.mechanisms.resize(configs.size());
  std::vector<Replay> slots(configs.size() * reps);
  std::vector<std::uint64_t> seeds(slots.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    for (std::size_t r = 0; r < reps; ++r) {
      seeds[k * reps + r] =
          MechanismSeed(options.seed, configs[k].Label(), k, static_cast<int>(r));
    }
  }
  internal::ParallelChunks(slots.size(), options.threads,
                           [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      MechanismConfig config = configs[s / reps];
      config.seed = seeds[s];
      const Ensemble* ensemble = options.ensemble;
      std::unique_ptr<Ensemble> trained;
      if (config.kind == MechanismKind::kPredicted && ensemble == nullptr) {
        TrainOptions train;
        train.n = cohort.size();
        train.m = config.m > 0 ? config.m : kDefaultPredictorRuns;
        train.seed = config.seed;
        train.threads = config.threads;
        trained = std::make_unique<Ensemble>(TrainEnsemble(pool, agents, train));
        ensemble = trained.get();
      }
      slots[s] = replay.Run(config, ensemble);
    }
  });

  for (std::size_t k = 0; k < configs.size(); ++k) {
    MechanismRun& run = result.mechanisms[k];
    run.label = configs[k].Label();
    run.parameter = Parameter(configs[k]);
    run.config = configs[k];
    for (std::size_t r = 0; r < reps; ++r) {
      Replay& rep = slots[k * reps + r];
      run.seeds.push_back(seeds[k * reps + r]);
      run.total_costs.push_back(rep.total_cost);
      if (rep.has_loss) run.expected_loss_totals.push_back(rep.loss_total);
      if (r == 0) run.trace = std::move(rep.trace);
    }
    run.config.seed = run.seeds.front();
  }
  return result;
}

LossAccounting LossAccountingReport(const BacktestResult& result) {
  for (const auto& run : result.mechanisms) {
    if (run.config.kind != MechanismKind::kMinRisk) continue;
    const auto n = static_cast<double>(result.items);
    LossAccounting report;
    report.mechanism = run.label;
    report.optimal_mean = result.optimal.MeanScore(result.items);
    report.minrisk_mean = run.MeanScore(result.items);
    report.mean_expected_loss = run.MeanExpectedLoss() / n;
    report.gap = report.optimal_mean - (report.minrisk_mean + report.mean_expected_loss);
    return report;
  }
  ThrowValidation("loss accounting needs a min_risk run");
}

std::string ResultJson(const BacktestResult& result) {
  Json doc;
  doc["schema"] = "v1";
  doc["items"] = result.items;
  Json agents = Json::array();
  for (std::size_t j = 0; j < result.agent_ids.size(); ++j) {
    agents.push_back(Json{{"id", result.agent_ids[j]}, {"capacity", result.capacities[j]}});
  }
  doc["agents"] = std::move(agents);
  doc["seed"] = result.seed;
  doc["replications"] = result.replications;
  doc["baselines"]["optimal"] = RunJson(result.optimal, result, false);
  doc["baselines"]["greedy"] = RunJson(result.greedy, result, true);
  Json mechanisms = Json::array();
  for (const auto& run : result.mechanisms) mechanisms.push_back(RunJson(run, result, true));
  doc["mechanisms"] = std::move(mechanisms);
  bool has_min_risk = false;
  for (const auto& run : result.mechanisms) {
    has_min_risk = has_min_risk || run.config.kind == MechanismKind::kMinRisk;
  }
  if (has_min_risk) {
    const LossAccounting loss = LossAccountingReport(result);
    doc["loss_accounting"] = Json{{"mechanism", loss.mechanism},
                                  {"optimal_mean", loss.optimal_mean},
                                  {"minrisk_mean", loss.minrisk_mean},
                                  {"mean_expected_loss", loss.mean_expected_loss},
                                  {"gap", loss.gap}};
  } else {
    doc["loss_accounting"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

std::string TraceJsonl(const BacktestResult& result) {
  std::string out;
  auto emit = [&](const MechanismRun& run, bool dynamic) {
    for (const auto& e : run.trace) {
      Json line;
      line["schema"] = "v1";
      line["mechanism"] = run.label;
      const Json fields = TraceJson(e, result.agent_ids, dynamic);
      for (const auto& [key, value] : fields.items()) line[key] = value;
      out += line.dump();
      out += '\n';
    }
  };
  emit(result.optimal, false);
  emit(result.greedy, true);
  for (const auto& run : result.mechanisms) emit(run, true);
  return out;
}

std::vector<PlotRow> PlotRows(const BacktestResult& result) {
  std::vector<PlotRow> rows;
  for (const auto& run : result.mechanisms) {
    rows.push_back({run.label, run.parameter, run.MeanScore(result.items),
                    run.CiHalfWidth(result.items)});
  }
  return rows;
}

std::string FormatPlotData(const std::vector<PlotRow>& rows) {
  std::string out = "mechanism,parameter,mean_score,ci_half_width\n";
  for (const auto& row : rows) {
    out += CsvField(row.mechanism) + ',' + CsvField(row.parameter) + ',' +
           FormatDouble(row.mean_score) + ',' + FormatDouble(row.ci_half_width) + '\n';
  }
  return out;
}

std::vector<PlotRow> ParsePlotData(std::istream& in) {
  const CsvTable table = ReadCsv(in);
  const std::vector<std::string> expected{"mechanism", "parameter", "mean_score",
                                          "ci_half_width"};
  if (table.header != expected) ThrowValidation("unexpected plot data header");
  std::vector<PlotRow> rows;
  for (const auto& r : table.rows) {
    rows.push_back({r[0], r[1], ParseNumber(r[2]), ParseNumber(r[3])});
  }
  return rows;
}

void EmitPlotData(const BacktestResult& result, const std::string& path) {
  WriteFile(path, FormatPlotData(PlotRows(result)));
}

}  // namespace dynassign
