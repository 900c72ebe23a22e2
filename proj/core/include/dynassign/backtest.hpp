#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dynassign/io.hpp"
#include "dynassign/mechanisms.hpp"
#include "dynassign/predictor.hpp"

namespace dynassign {

struct TraceEntry {
  std::size_t ordinal = 0;  // 1-based arrival position
  std::string item_id;
  int agent = -1;
  int greedy_agent = -1;    // greedy's choice in the same state; -1 for optimal
  double cost = 0.0;
  std::optional<double> expected_loss;
  std::vector<int> remaining;  // after the commit
};

// One mechanism over the cohort. The trace belongs to replication 0; the
// totals cover every replication.
struct MechanismRun {
  std::string label;
  std::string parameter;  // e.g. "m=1000", "lambda=0.2", "" for greedy
  MechanismConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<double> total_costs;
  std::vector<double> expected_loss_totals;  // min-risk only
  std::vector<TraceEntry> trace;

  double MeanTotalCost() const;
  double MeanScore(std::size_t items) const;  // 1 - mean cost per item
  // Normal-approximation 95% half-width over replications; 0 for one.
  double CiHalfWidth(std::size_t items) const;
  bool HasExpectedLoss() const { return !expected_loss_totals.empty(); }
  double MeanExpectedLoss() const;
};

struct LossAccounting {
  std::string mechanism;
  double optimal_mean = 0.0;
  double minrisk_mean = 0.0;
  double mean_expected_loss = 0.0;  // per item, on the score scale
  double gap = 0.0;                 // optimal - (minrisk + expected loss)
};

struct BacktestOptions {
  std::uint64_t seed = 0;
  int replications = 1;
  int threads = 1;  // concurrent mechanism runs
  // Used by every predicted config when set; otherwise each replication
  // trains its own ensemble on the cohort size with config.m runs.
  const Ensemble* ensemble = nullptr;
};

struct BacktestResult {
  std::vector<std::string> agent_ids;
  std::vector<int> capacities;
  std::size_t items = 0;
  std::uint64_t seed = 0;
  int replications = 1;
  MechanismRun optimal;
  MechanismRun greedy;
  std::vector<MechanismRun> mechanisms;
};

// Seed of replication `rep` of the `index`-th configured mechanism. Every
// mechanism draws from its own namespace of the master seed.
std::uint64_t MechanismSeed(std::uint64_t master, const std::string& label,
                            std::size_t index, int rep);

// Replays the cohort in file order under the static optimum, greedy and
// every configured mechanism with shared capacities. Configs with
// use_batches route consecutive rows sharing a batch id through the batch
// extension. config.seed is replaced by the mechanism's namespace seed.
BacktestResult RunBacktest(const Cohort& cohort, const HistoricalPool& pool,
                           const AgentPool& agents,
                           const std::vector<MechanismConfig>& configs,
                           const BacktestOptions& options);

// Uses the first configured min-risk run. Throws kValidation without one.
LossAccounting LossAccountingReport(const BacktestResult& result);

// Result document (schema v1) with stable key order and no timings, so equal
// inputs give byte-identical text.
std::string ResultJson(const BacktestResult& result);

// One JSON object per line and per assignment of replication 0.
std::string TraceJsonl(const BacktestResult& result);

struct PlotRow {
  std::string mechanism;
  std::string parameter;
  double mean_score = 0.0;
  double ci_half_width = 0.0;

  bool operator==(const PlotRow&) const = default;
};

// One row per configured mechanism.
std::vector<PlotRow> PlotRows(const BacktestResult& result);
// CSV with header `mechanism,parameter,mean_score,ci_half_width`.
std::string FormatPlotData(const std::vector<PlotRow>& rows);
std::vector<PlotRow> ParsePlotData(std::istream& in);
void EmitPlotData(const BacktestResult& result, const std::string& path);

}  // namespace dynassign
