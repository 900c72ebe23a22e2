#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dynassign/lap.hpp"
#include "dynassign/stochastic.hpp"

namespace dynassign {

// Stationary generator of outcome scores. Every item belongs to one of
// `clusters` latent types drawn uniformly; its score at agent j is
//   s_ij = logistic(intercept + a_j + b_i + g_{type(i), j} + e_ij)
// with agent effects a_j ~ N(0, agent_sd^2), item effects
// b_i ~ N(0, item_sd^2), type-by-agent affinities g ~ N(0, affinity_sd^2)
// and noise e_ij ~ N(0, noise_sd^2). Costs are 1 - s_ij.
//
// Seed contract: the agent effects and affinities come from stream tag 1,
// pool items from tag 2 and cohort items from tag 3 of the master seed, so
// a pool and a cohort from the same seed share one distribution while being
// independent samples.
struct SyntheticSpec {
  std::size_t agents = 5;
  std::size_t pool_size = 500;
  std::size_t cohort_size = 60;
  std::uint64_t seed = 0;
  int clusters = 3;
  double intercept = 0.0;
  double agent_sd = 0.5;
  double item_sd = 0.5;
  double affinity_sd = 1.0;
  double noise_sd = 0.3;

  void Validate() const;
};

struct SyntheticInstance {
  std::vector<std::string> agent_ids;          // "A1".."An"
  std::vector<std::vector<double>> pool;       // costs
  std::vector<std::vector<double>> cohort;     // costs, arrival order

  HistoricalPool Pool() const { return HistoricalPool(agent_ids, pool); }
};

SyntheticInstance GenerateSynthetic(const SyntheticSpec& spec);

// Capacities summing to exactly `items`, spread as evenly as possible with
// the remainder going to the first agents.
AgentPool EvenCapacities(const std::vector<std::string>& agent_ids, std::size_t items);

// Standard normal deviate by Box-Muller. std::normal_distribution is not
// reproducible across standard libraries.
double NormalDeviate(SplitMix64& rng);

}  // namespace dynassign
