#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <thread>

#include "dynassign/backtest.hpp"
#include "dynassign/error.hpp"
#include "dynassign/io.hpp"
#include "dynassign/lap.hpp"
#include "dynassign/mechanisms.hpp"
#include "dynassign/predictor.hpp"
#include "dynassign/service.hpp"
#include "dynassign/synthetic.hpp"

#ifndef DYNASSIGN_VERSION
#define DYNASSIGN_VERSION "0.0.0"
#endif

namespace dynassign::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Flags shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
  std::string direction = "min";
  std::string format = "json";
  int threads = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
};

void AddCommon(CLI::App* cmd, Common& common, const std::string& default_format) {
  common.format = default_format;
  cmd->add_option("--seed", common.seed, "Master seed")->capture_default_str();
  cmd->add_option("--direction", common.direction,
                  "Input values are costs (min) or outcome scores in [0,1] (max); "
                  "scores are ingested as 1 - s")
      ->check(CLI::IsMember({"min", "max"}))
      ->capture_default_str();
  cmd->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--threads", common.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// Input and output files plus resolved flags, written as manifest.json so a
// run can be audited and repeated.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv, const Common& common)
      : command_(std::move(command)), argv_(argv) {
    flags_["seed"] = common.seed;
    flags_["direction"] = common.direction;
    flags_["format"] = common.format;
    flags_["threads"] = common.threads;
  }

  Json& flags() { return flags_; }

  std::string Input(const std::string& path) {
    std::string bytes = ReadFile(path);
    inputs_.push_back(Json{{"path", path}, {"bytes", bytes.size()},
                           {"fnv1a64", HexDigest(Fnv1a64(bytes))}});
    return bytes;
  }

  void Output(const fs::path& dir, const std::string& name, const std::string& bytes) {
    WriteFile((dir / name).string(), bytes);
    outputs_.push_back(Json{{"file", name}, {"bytes", bytes.size()},
                            {"fnv1a64", HexDigest(Fnv1a64(bytes))}});
  }

  // Threads do not change any output, so they stay out of the manifest
  // digest comparison but are recorded for the audit trail.
  void Write(const fs::path& dir) const {
    Json doc{{"schema", "v1"},
             {"tool", "dynassign"},
             {"version", DYNASSIGN_VERSION},
             {"command", command_},
             {"argv", argv_},
             {"flags", flags_},
             {"inputs", inputs_},
             {"outputs", outputs_}};
    WriteFile((dir / "manifest.json").string(), doc.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  Json flags_ = Json::object();
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
};

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) ThrowIo("cannot create output directory '" + dir.string() + "': " + ec.message());
}

template <typename Fn>
auto ParseText(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  return fn(in);
}

std::string CsvLine(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    out += fields[k];
  }
  return out + '\n';
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
  Common common;
  std::string costs;
  std::string capacities;
  std::string out_dir;
};

int RunSolve(const SolveArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("solve", argv, a.common);
  const Direction direction = ParseDirection(a.common.direction);
  const CostMatrix matrix =
      ParseText(manifest.Input(a.costs), [&](std::istream& in) { return ReadMatrixCsv(in, direction); });
  std::vector<int> column;
  double total = 0.0;
  if (!a.capacities.empty()) {
    const AgentPool agents = ParseText(manifest.Input(a.capacities), [&](std::istream& in) {
      return ReadCapacitiesCsv(in, matrix.col_ids());
    });
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      rows.emplace_back(matrix.row(r).begin(), matrix.row(r).end());
    }
    const StaticAssignment s = StaticOptimalAssign(rows, agents);
    column = s.item_agent;
    total = s.total_cost;
  } else {
    const Assignment s = Solve(matrix);
    column = s.row_to_col;
    total = s.total_cost;
  }
  std::string report;
  if (a.common.format == "json") {
    Json pairs = Json::array();
    for (std::size_t r = 0; r < column.size(); ++r) {
      const auto c = static_cast<std::size_t>(column[r]);
      pairs.push_back(Json{{"item", matrix.row_ids()[r]},
                           {"column", matrix.col_ids()[c]},
                           {"cost", matrix(r, c)}});
    }
    report = Json{{"schema", "v1"}, {"total_cost", total}, {"assignment", pairs}}.dump(2) + "\n";
  } else {
    report = "item,column,cost\n";
    for (std::size_t r = 0; r < column.size(); ++r) {
      const auto c = static_cast<std::size_t>(column[r]);
      report += CsvLine({matrix.row_ids()[r], matrix.col_ids()[c], FormatDouble(matrix(r, c))});
    }
    report += CsvLine({"total", "", FormatDouble(total)});
  }
  out << report;
  if (!a.out_dir.empty()) {
    EnsureDir(a.out_dir);
    manifest.Output(a.out_dir, a.common.format == "json" ? "solution.json" : "solution.csv", report);
    manifest.Write(a.out_dir);
  }
  return kOk;
}

// ---- backtest --------------------------------------------------------------

struct BacktestArgs {
  Common common;
  std::string cohort;
  std::string pool;
  std::string capacities;
  std::vector<std::string> mechanisms{"min_risk", "approx_min_risk"};
  int m = 0;
  double lambda = 0.5;
  int t = 1;
  int replications = 1;
  bool batches = false;
  std::string ensemble;
  std::string out_dir = "backtest_out";
};

std::string SummaryCsv(const BacktestResult& result) {
  std::string s = "mechanism,parameter,mean_total_cost,mean_score,ci_half_width,mean_expected_loss_total\n";
  auto row = [&](const MechanismRun& run) {
    s += CsvLine({run.label, run.parameter, FormatDouble(run.MeanTotalCost()),
                  FormatDouble(run.MeanScore(result.items)),
                  FormatDouble(run.CiHalfWidth(result.items)),
                  run.HasExpectedLoss() ? FormatDouble(run.MeanExpectedLoss()) : ""});
  };
  row(result.optimal);
  row(result.greedy);
  for (const auto& run : result.mechanisms) row(run);
  return s;
}

int RunBacktestCommand(const BacktestArgs& a, const std::vector<std::string>& argv,
                       std::ostream& out) {
  Manifest manifest("backtest", argv, a.common);
  const Direction direction = ParseDirection(a.common.direction);
  const HistoricalPool pool =
      ParseText(manifest.Input(a.pool), [&](std::istream& in) { return ReadPoolCsv(in, direction); });
  const AgentPool agents = ParseText(manifest.Input(a.capacities), [&](std::istream& in) {
    return ReadCapacitiesCsv(in, pool.agent_ids());
  });
  const Cohort cohort = ParseText(manifest.Input(a.cohort), [&](std::istream& in) {
    return ReadCohortCsv(in, direction, pool.agent_ids());
  });
  std::vector<MechanismConfig> configs;
  for (const auto& name : a.mechanisms) {
    MechanismConfig c;
    c.kind = ParseMechanismKind(name);
    c.m = a.m;
    c.lambda = a.lambda;
    c.t = a.t;
    c.use_batches = a.batches && (c.kind == MechanismKind::kMinRisk ||
                                  c.kind == MechanismKind::kApproxMinRisk);
    configs.push_back(c);
  }
  const int jobs = std::max<int>(1, static_cast<int>(configs.size()) * a.replications);
  BacktestOptions options;
  options.seed = a.common.seed;
  options.replications = a.replications;
  options.threads = std::min(a.common.threads, jobs);
  for (auto& c : configs) c.threads = std::max(1, a.common.threads / jobs);
  std::unique_ptr<Ensemble> ensemble;
  if (!a.ensemble.empty()) {
    const std::string bytes = manifest.Input(a.ensemble);
    std::istringstream in(bytes);
    ensemble = std::make_unique<Ensemble>(LoadEnsemble(in));
    if (ensemble->agent_ids != pool.agent_ids()) {
      ThrowValidation("ensemble agents differ from the pool agents");
    }
    options.ensemble = ensemble.get();
  }
  manifest.flags()["mechanisms"] = a.mechanisms;
  manifest.flags()["m"] = a.m;
  manifest.flags()["lambda"] = a.lambda;
  manifest.flags()["t"] = a.t;
  manifest.flags()["replications"] = a.replications;
  manifest.flags()["batches"] = a.batches;

  const BacktestResult result = RunBacktest(cohort, pool, agents, configs, options);

  EnsureDir(a.out_dir);
  if (a.common.format == "json") {
    manifest.Output(a.out_dir, "result.json", ResultJson(result));
  } else {
    manifest.Output(a.out_dir, "result.csv", SummaryCsv(result));
  }
  manifest.Output(a.out_dir, "plot.csv", FormatPlotData(PlotRows(result)));
  manifest.Output(a.out_dir, "trace.jsonl", TraceJsonl(result));
  manifest.Write(a.out_dir);

  out << SummaryCsv(result);
  for (const auto& run : result.mechanisms) {
    if (run.config.kind != MechanismKind::kMinRisk) continue;
    const LossAccounting loss = LossAccountingReport(result);
    out << "loss_accounting optimal_mean=" << FormatDouble(loss.optimal_mean)
        << " minrisk_mean=" << FormatDouble(loss.minrisk_mean)
        << " mean_expected_loss=" << FormatDouble(loss.mean_expected_loss)
        << " gap=" << FormatDouble(loss.gap) << "\n";
    break;
  }
  return kOk;
}

// ---- train-predictor -------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string pool;
  std::string capacities;
  std::size_t n = 0;
  int m = 20;
  std::string out_dir = "predictor_out";
};

int RunTrain(const TrainArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("train-predictor", argv, a.common);
  const Direction direction = ParseDirection(a.common.direction);
  const HistoricalPool pool =
      ParseText(manifest.Input(a.pool), [&](std::istream& in) { return ReadPoolCsv(in, direction); });
  const AgentPool agents = ParseText(manifest.Input(a.capacities), [&](std::istream& in) {
    return ReadCapacitiesCsv(in, pool.agent_ids());
  });
  TrainOptions options;
  options.n = a.n > 0 ? a.n : static_cast<std::size_t>(agents.TotalCapacity());
  options.m = a.m;
  options.seed = a.common.seed;
  options.threads = a.common.threads;
  manifest.flags()["n"] = options.n;
  manifest.flags()["m"] = a.m;
  const Ensemble ensemble = TrainEnsemble(pool, agents, options);

  std::ostringstream bin;
  SaveEnsemble(ensemble, bin);
  std::ostringstream summary;
  WriteEnsembleSummary(ensemble, summary);
  EnsureDir(a.out_dir);
  manifest.Output(a.out_dir, "ensemble.bin", bin.str());
  manifest.Output(a.out_dir, "ensemble_summary.txt", summary.str());

  std::string report;
  if (a.common.format == "json") {
    Json agents_json = Json::array();
    for (std::size_t j = 0; j < ensemble.agents(); ++j) {
      Json nz = Json::array();
      for (const auto& model : ensemble.models[j]) nz.push_back(model.NonZero());
      agents_json.push_back(Json{{"agent", ensemble.agent_ids[j]}, {"nonzero", nz}});
    }
    report = Json{{"schema", "v1"},
                  {"runs", ensemble.runs()},
                  {"features", ensemble.feature_mean.size()},
                  {"agents", agents_json}}
                 .dump(2) +
             "\n";
  } else {
    report = "agent,run,nonzero,penalty\n";
    for (std::size_t j = 0; j < ensemble.agents(); ++j) {
      for (std::size_t r = 0; r < ensemble.runs(); ++r) {
        const auto& model = ensemble.models[j][r];
        report += CsvLine({ensemble.agent_ids[j], std::to_string(r),
                           std::to_string(model.NonZero()), FormatDouble(model.penalty)});
      }
    }
  }
  manifest.Output(a.out_dir, a.common.format == "json" ? "report.json" : "report.csv", report);
  manifest.Write(a.out_dir);
  out << report;
  return kOk;
}

// ---- gen-synthetic ---------------------------------------------------------

struct SyntheticArgs {
  Common common;
  SyntheticSpec spec;
  std::size_t batch_size = 0;
  std::string out_dir = "synthetic_out";
};

std::string Value(double cost, Direction direction) {
  return FormatDouble(direction == Direction::kMax ? 1.0 - cost : cost);
}

int RunSynthetic(SyntheticArgs a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("gen-synthetic", argv, a.common);
  const Direction direction = ParseDirection(a.common.direction);
  a.spec.seed = a.common.seed;
  const SyntheticInstance inst = GenerateSynthetic(a.spec);
  const AgentPool capacities = EvenCapacities(inst.agent_ids, a.spec.cohort_size);
  Json& flags = manifest.flags();
  flags["agents"] = a.spec.agents;
  flags["pool_size"] = a.spec.pool_size;
  flags["cohort_size"] = a.spec.cohort_size;
  flags["clusters"] = a.spec.clusters;
  flags["intercept"] = a.spec.intercept;
  flags["agent_sd"] = a.spec.agent_sd;
  flags["item_sd"] = a.spec.item_sd;
  flags["affinity_sd"] = a.spec.affinity_sd;
  flags["noise_sd"] = a.spec.noise_sd;
  flags["batch_size"] = a.batch_size;
  EnsureDir(a.out_dir);

  auto batch_of = [&](std::size_t i) {
    return "g" + std::to_string(a.batch_size > 0 ? i / a.batch_size + 1 : i + 1);
  };
  if (a.common.format == "json") {
    Json pool = Json::array();
    for (const auto& v : inst.pool) {
      Json row = Json::array();
      for (double c : v) row.push_back(direction == Direction::kMax ? 1.0 - c : c);
      pool.push_back(row);
    }
    Json cohort = Json::array();
    for (std::size_t i = 0; i < inst.cohort.size(); ++i) {
      Json row = Json::array();
      for (double c : inst.cohort[i]) row.push_back(direction == Direction::kMax ? 1.0 - c : c);
      Json item{{"item_id", "i" + std::to_string(i + 1)}, {"vector", row}};
      if (a.batch_size > 0) item["batch_id"] = batch_of(i);
      cohort.push_back(item);
    }
    Json agents = Json::array();
    for (std::size_t j = 0; j < inst.agent_ids.size(); ++j) {
      agents.push_back(Json{{"id", inst.agent_ids[j]}, {"capacity", capacities.capacities[j]}});
    }
    manifest.Output(a.out_dir, "instance.json",
                    Json{{"schema", "v1"}, {"direction", a.common.direction}, {"agents", agents},
                         {"pool", pool}, {"cohort", cohort}}
                            .dump(2) + "\n");
  } else {
    std::string pool = CsvLine(inst.agent_ids);
    for (const auto& v : inst.pool) {
      std::vector<std::string> f;
      for (double c : v) f.push_back(Value(c, direction));
      pool += CsvLine(f);
    }
    std::vector<std::string> header{"item_id"};
    if (a.batch_size > 0) header.push_back("batch_id");
    header.insert(header.end(), inst.agent_ids.begin(), inst.agent_ids.end());
    std::string cohort = CsvLine(header);
    for (std::size_t i = 0; i < inst.cohort.size(); ++i) {
      std::vector<std::string> f{"i" + std::to_string(i + 1)};
      if (a.batch_size > 0) f.push_back(batch_of(i));
      for (double c : inst.cohort[i]) f.push_back(Value(c, direction));
      cohort += CsvLine(f);
    }
    std::string caps = "agent,capacity\n";
    for (std::size_t j = 0; j < inst.agent_ids.size(); ++j) {
      caps += CsvLine({inst.agent_ids[j], std::to_string(capacities.capacities[j])});
    }
    manifest.Output(a.out_dir, "pool.csv", pool);
    manifest.Output(a.out_dir, "cohort.csv", cohort);
    manifest.Output(a.out_dir, "capacities.csv", caps);
  }
  manifest.Write(a.out_dir);
  out << "wrote " << inst.pool.size() << " pool vectors and " << inst.cohort.size()
      << " arrivals over " << inst.agent_ids.size() << " agents to " << a.out_dir << "\n";
  return kOk;
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  Common common;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string journal_dir = "sessions";
};

HttpServer* g_server = nullptr;

extern "C" void StopServer(int) {
  if (g_server) g_server->Stop();
}

int RunServe(const ServeArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  if (a.common.format != "json") ThrowValidation("serve speaks JSON only");
  Manifest manifest("serve", argv, a.common);
  manifest.flags()["host"] = a.host;
  manifest.flags()["port"] = a.port;
  manifest.flags()["journal_dir"] = a.journal_dir;
  SessionStore store(a.journal_dir, a.common.seed);
  ServiceApi api(store, ParseDirection(a.common.direction));
  HttpServer server(api);
  const int port = server.Bind(a.host, a.port);
  if (port <= 0) ThrowIo("cannot bind " + a.host + ":" + std::to_string(a.port));
  manifest.Write(a.journal_dir);
  out << "serving on http://" << a.host << ":" << port << " with "
      << store.Ids().size() << " recovered sessions" << std::endl;
  g_server = &server;
  std::signal(SIGINT, StopServer);
  std::signal(SIGTERM, StopServer);
  server.Listen();
  g_server = nullptr;
  return kOk;
}

constexpr const char* kSyntheticHelp =
    "Each item has a latent type drawn uniformly from --clusters types and\n"
    "its score at agent j is\n"
    "  s_ij = logistic(intercept + a_j + b_i + g[type(i)][j] + e_ij)\n"
    "with agent effects a_j ~ N(0, agent_sd^2), item effects\n"
    "b_i ~ N(0, item_sd^2), type-by-agent affinities g ~ N(0, affinity_sd^2)\n"
    "and noise e_ij ~ N(0, noise_sd^2); costs are 1 - s.\n"
    "Seed contract: agent effects and affinities come from stream 1 of\n"
    "--seed, pool items from stream 2 and cohort items from stream 3, so\n"
    "the pool and the cohort share one distribution and are independent.\n"
    "Capacities sum to the cohort size, remainder to the first agents.";

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic assignment of sequential arrivals to capacity-limited agents"};
  app.name("dynassign");
  app.require_subcommand(1);
  app.set_version_flag("--version", DYNASSIGN_VERSION);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Optimal static assignment of a cost matrix");
  AddCommon(solve_cmd, solve.common, "json");
  solve_cmd->add_option("--costs", solve.costs, "Matrix CSV; rows are items")
      ->required()
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--capacities", solve.capacities,
                        "agent,capacity CSV; matrix columns are then agents");
  solve_cmd->add_option("--out-dir", solve.out_dir, "Also write the solution and a manifest here");

  BacktestArgs bt;
  auto* bt_cmd = app.add_subcommand("backtest", "Replay a cohort under every mechanism");
  AddCommon(bt_cmd, bt.common, "json");
  bt_cmd->add_option("--cohort", bt.cohort, "Cohort CSV: item_id[,batch_id],<agents>")->required();
  bt_cmd->add_option("--pool", bt.pool, "Historical pool CSV")->required();
  bt_cmd->add_option("--capacities", bt.capacities, "agent,capacity CSV")->required();
  bt_cmd->add_option("--mechanism", bt.mechanisms,
                     "min_risk, approx_min_risk, greedy, weighted_cq, sequential_cq, predicted")
      ->capture_default_str();
  bt_cmd->add_option("--m", bt.m, "Draws (or predictor runs); 0 selects the default")
      ->check(CLI::NonNegativeNumber);
  bt_cmd->add_option("--lambda", bt.lambda, "weighted_cq weight on the standardized costs")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bt_cmd->add_option("--t", bt.t, "sequential_cq candidate count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bt_cmd->add_option("--replications", bt.replications, "Seed replications per mechanism")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bt_cmd->add_flag("--batches", bt.batches, "Assign rows sharing a batch_id together");
  bt_cmd->add_option("--ensemble", bt.ensemble, "Trained ensemble for predicted");
  bt_cmd->add_option("--out-dir", bt.out_dir, "Output directory")->capture_default_str();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train-predictor", "Train the prediction ensemble");
  AddCommon(tr_cmd, tr.common, "json");
  tr_cmd->add_option("--pool", tr.pool, "Historical pool CSV")->required();
  tr_cmd->add_option("--capacities", tr.capacities, "agent,capacity CSV")->required();
  tr_cmd->add_option("--n", tr.n, "Simulated items per run; 0 uses the total capacity");
  tr_cmd->add_option("--m", tr.m, "Training runs")->check(CLI::PositiveNumber)->capture_default_str();
  tr_cmd->add_option("--out-dir", tr.out_dir, "Output directory")->capture_default_str();

  ServeArgs sv;
  auto* sv_cmd = app.add_subcommand("serve", "Serve live assignment sessions over HTTP");
  AddCommon(sv_cmd, sv.common, "json");
  sv_cmd->add_option("--host", sv.host, "Bind address")->capture_default_str();
  sv_cmd->add_option("--port", sv.port, "Port; 0 picks a free one")->capture_default_str();
  sv_cmd->add_option("--journal-dir", sv.journal_dir, "Session journals")->capture_default_str();

  SyntheticArgs sy;
  auto* sy_cmd = app.add_subcommand("gen-synthetic", "Generate a synthetic pool, cohort and capacities");
  sy_cmd->footer(kSyntheticHelp);
  AddCommon(sy_cmd, sy.common, "csv");
  sy.common.direction = "max";
  sy_cmd->add_option("--agents", sy.spec.agents, "Number of agents")->capture_default_str();
  sy_cmd->add_option("--pool-size", sy.spec.pool_size, "Historical vectors")->capture_default_str();
  sy_cmd->add_option("--cohort-size", sy.spec.cohort_size, "Arrivals")->capture_default_str();
  sy_cmd->add_option("--clusters", sy.spec.clusters, "Latent item types")->capture_default_str();
  sy_cmd->add_option("--intercept", sy.spec.intercept, "Logit intercept")->capture_default_str();
  sy_cmd->add_option("--agent-sd", sy.spec.agent_sd, "Agent effect sd")->capture_default_str();
  sy_cmd->add_option("--item-sd", sy.spec.item_sd, "Item effect sd")->capture_default_str();
  sy_cmd->add_option("--affinity-sd", sy.spec.affinity_sd, "Type-by-agent sd")->capture_default_str();
  sy_cmd->add_option("--noise-sd", sy.spec.noise_sd, "Noise sd")->capture_default_str();
  sy_cmd->add_option("--batch-size", sy.batch_size, "Add batch_id groups of this size");
  sy_cmd->add_option("--out-dir", sy.out_dir, "Output directory")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kValidationError;
  }

  try {
    if (*solve_cmd) return RunSolve(solve, args, out);
    if (*bt_cmd) return RunBacktestCommand(bt, args, out);
    if (*tr_cmd) return RunTrain(tr, args, out);
    if (*sv_cmd) return RunServe(sv, args, out);
    if (*sy_cmd) return RunSynthetic(sy, args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kValidation:
        return kValidationError;
      case ErrorCode::kInfeasible:
        return kInfeasibleError;
      case ErrorCode::kIo:
        return kIoError;
    }
  } catch (const ApiFailure& e) {
    err << "error: " << e.what() << "\n";
    return e.error() == ApiError::kInfeasible ? kInfeasibleError : kValidationError;
  }
  return kValidationError;
}

}  // namespace dynassign::cli
