#include "dynassign/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "dynassign/error.hpp"

namespace dynassign {
namespace {

constexpr std::uint64_t kWorldTag = 1;
constexpr std::uint64_t kPoolTag = 2;
constexpr std::uint64_t kCohortTag = 3;

SplitMix64 TaggedStream(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(Mix64(Mix64(seed) ^ tag));
}

struct World {
  std::vector<double> agent_effect;
  std::vector<std::vector<double>> affinity;  // [cluster][agent]
};

World MakeWorld(const SyntheticSpec& spec) {
  SplitMix64 rng = TaggedStream(spec.seed, kWorldTag);
  World world;
  world.agent_effect.resize(spec.agents);
  for (double& a : world.agent_effect) a = spec.agent_sd * NormalDeviate(rng);
  world.affinity.assign(static_cast<std::size_t>(spec.clusters),
                        std::vector<double>(spec.agents));
  for (auto& row : world.affinity) {
    for (double& g : row) g = spec.affinity_sd * NormalDeviate(rng);
  }
  return world;
}

std::vector<double> DrawItem(const SyntheticSpec& spec, const World& world,
                             SplitMix64& rng) {
  const auto type = rng.Below(static_cast<std::uint64_t>(spec.clusters));
  const double item = spec.item_sd * NormalDeviate(rng);
  std::vector<double> costs(spec.agents);
  for (std::size_t j = 0; j < spec.agents; ++j) {
    const double eta = spec.intercept + world.agent_effect[j] + item +
                       world.affinity[type][j] + spec.noise_sd * NormalDeviate(rng);
    costs[j] = 1.0 - 1.0 / (1.0 + std::exp(-eta));
  }
  return costs;
}

}  // namespace

void SyntheticSpec::Validate() const {
  if (agents == 0) ThrowValidation("synthetic generator needs at least one agent");
  if (pool_size == 0) ThrowValidation("synthetic pool must be nonempty");
  if (clusters < 1) ThrowValidation("synthetic generator needs at least one cluster");
  for (double sd : {agent_sd, item_sd, affinity_sd, noise_sd}) {
    if (!(sd >= 0.0) || !std::isfinite(sd)) {
      ThrowValidation("synthetic standard deviations must be finite and >= 0");
    }
  }
  if (!std::isfinite(intercept)) ThrowValidation("synthetic intercept must be finite");
}

double NormalDeviate(SplitMix64& rng) {
  // 1 - U keeps the logarithm's argument in (0, 1].
  const double u1 = 1.0 - rng.Uniform01();
  const double u2 = rng.Uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SyntheticInstance GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  const World world = MakeWorld(spec);
  SyntheticInstance out;
  out.agent_ids.reserve(spec.agents);
  for (std::size_t j = 0; j < spec.agents; ++j) {
    out.agent_ids.push_back("A" + std::to_string(j + 1));
  }
  SplitMix64 pool_rng = TaggedStream(spec.seed, kPoolTag);
  out.pool.reserve(spec.pool_size);
  for (std::size_t k = 0; k < spec.pool_size; ++k) {
    out.pool.push_back(DrawItem(spec, world, pool_rng));
  }
  SplitMix64 cohort_rng = TaggedStream(spec.seed, kCohortTag);
  out.cohort.reserve(spec.cohort_size);
  for (std::size_t i = 0; i < spec.cohort_size; ++i) {
    out.cohort.push_back(DrawItem(spec, world, cohort_rng));
  }
  return out;
}

AgentPool EvenCapacities(const std::vector<std::string>& agent_ids, std::size_t items) {
  if (agent_ids.empty()) ThrowValidation("no agents to spread capacity over");
  const std::size_t n = agent_ids.size();
  std::vector<int> caps(n, static_cast<int>(items / n));
  for (std::size_t j = 0; j < items % n; ++j) ++caps[j];
  return AgentPool(agent_ids, std::move(caps));
}

}  // namespace dynassign
