#include <benchmark/benchmark.h>

#include <vector>

#include "dynassign/lap.hpp"
#include "dynassign/mechanisms.hpp"
#include "dynassign/predictor.hpp"
#include "dynassign/stochastic.hpp"
#include "dynassign/synthetic.hpp"

namespace {

using namespace dynassign;

CostMatrix RandomMatrix(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> values(n * n);
  for (double& v : values) v = rng.Uniform01();
  return CostMatrix(n, n, std::move(values));
}

void BM_Solve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CostMatrix matrix = RandomMatrix(n, 42);
  for (auto _ : state) benchmark::DoNotOptimize(Solve(matrix).total_cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Solve)->RangeMultiplier(2)->Range(8, 512)->Complexity();

struct Fixture {
  explicit Fixture(std::size_t items) {
    SyntheticSpec spec;
    spec.cohort_size = items;
    spec.seed = 7;
    instance = GenerateSynthetic(spec);
    pool = instance.Pool();
    agents = EvenCapacities(instance.agent_ids, items);
  }
  SyntheticInstance instance;
  HistoricalPool pool;
  AgentPool agents;
};

// First arrival of a cohort, the most expensive decision.
void BM_MinRisk(benchmark::State& state) {
  const auto items = static_cast<std::size_t>(state.range(0));
  Fixture f(items);
  const DynamicState dyn(f.agents);
  MechanismConfig config;
  config.kind = MechanismKind::kMinRisk;
  config.m = static_cast<int>(state.range(1));
  const ArrivalContext arrival{1, items};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        AssignMinRisk(dyn, f.instance.cohort[0], f.pool, arrival, config).chosen_agent);
  }
}
BENCHMARK(BM_MinRisk)->Args({20, 100})->Args({60, 100})->Args({60, 1000})
    ->Unit(benchmark::kMillisecond);

void BM_ApproxMinRisk(benchmark::State& state) {
  const auto items = static_cast<std::size_t>(state.range(0));
  Fixture f(items);
  const DynamicState dyn(f.agents);
  MechanismConfig config;
  config.kind = MechanismKind::kApproxMinRisk;
  config.m = static_cast<int>(state.range(1));
  const ArrivalContext arrival{1, items};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        AssignApproxMinRisk(dyn, f.instance.cohort[0], f.pool, arrival, config).chosen_agent);
  }
}
BENCHMARK(BM_ApproxMinRisk)->Args({20, 100})->Args({60, 100})->Args({60, 1000})
    ->Unit(benchmark::kMillisecond);

void BM_PredictedRecommend(benchmark::State& state) {
  Fixture f(20);
  TrainOptions options;
  options.n = 20;
  options.m = 4;
  options.seed = 3;
  const Ensemble ensemble = TrainEnsemble(f.pool, f.agents, options);
  const DynamicState dyn(f.agents);
  const std::vector<double> quantiles =
      QuantileTable(f.pool).QuantileVector(f.instance.cohort[0]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        AssignPredicted(dyn, f.instance.cohort[0], quantiles, ensemble).chosen_agent);
  }
}
BENCHMARK(BM_PredictedRecommend);

}  // namespace

BENCHMARK_MAIN();
