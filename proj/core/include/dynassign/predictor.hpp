#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynassign/lap.hpp"
#include "dynassign/mechanisms.hpp"
#include "dynassign/stochastic.hpp"

namespace dynassign {

// Number of predictors for n' agents: n' costs, n' quantiles, and every
// product of two distinct base features.
std::size_t FeatureCount(std::size_t agents);

// Layout: costs by agent, quantiles by agent, then products x_a * x_b for
// a < b over the 2n' base features in lexicographic (a, b) order.
std::vector<double> BuildFeatures(std::span<const double> costs,
                                  std::span<const double> quantiles);

// Labeled rows from one simulated static assignment. `x` is row-major raw
// (unscaled) features; `y` holds the assigned agent per row.
struct TrainingSet {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<int> y;

  std::size_t rows() const { return y.size(); }
};

// Draws `n` pool vectors on `stream`, assigns them optimally under the
// capacities, and labels each with its agent.
TrainingSet SimulateTrainingRun(const HistoricalPool& pool, const QuantileTable& table,
                                const AgentPool& agents, std::size_t n,
                                const DrawStream& stream);

// Binary lasso-logistic problem on already standardized, column-major data.
struct LassoProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const double> x;         // cols blocks of `rows` values
  std::span<const std::uint8_t> y;   // 0 or 1
};

struct LassoFit {
  double intercept = 0.0;
  std::vector<double> weights;
  double penalty = 0.0;
};

// Convergence bound on the largest curvature-weighted squared coefficient
// change, mean(w x_j^2) * dw_j^2, within a sweep and across reweightings.
inline constexpr double kLassoTolerance = 1e-7;

// Smallest penalty at which every weight is zero, inflated by a relative
// 1e-9 so that the zero solution survives rounding.
double LambdaMax(const LassoProblem& problem);

// Minimizes mean negative log-likelihood + penalty * sum |w| with an
// unpenalized intercept by iteratively reweighted cyclic coordinate descent.
// `warm` seeds the coefficients.
LassoFit FitLasso(const LassoProblem& problem, double penalty,
                  const LassoFit* warm = nullptr);

struct LassoOptions {
  int folds = 5;
  int grid = 50;
  double min_ratio = 1e-4;
};

struct CvPoint {
  double penalty = 0.0;
  double loss = 0.0;
};

struct LogisticModel {
  double intercept = 0.0;
  std::vector<double> weights;  // standardized feature scale
  double penalty = 0.0;
  bool constant = false;        // fallback without features
  std::vector<CvPoint> cv;      // validation log-loss per grid penalty

  double Predict(std::span<const double> standardized) const;
  std::size_t NonZero() const;
};

// One-vs-rest fit for `positive` over a standardized problem: penalty
// chosen from a log grid by k-fold validation log-loss (ties to the larger
// penalty). A class with no positives, no negatives, or a positive rate
// below `min_rate` gets a constant model at the Laplace-smoothed rate.
LogisticModel FitLassoLogistic(const LassoProblem& problem, const LassoOptions& options,
                               double min_rate);

struct Ensemble {
  std::vector<std::string> agent_ids;
  std::vector<double> feature_mean;
  std::vector<double> feature_sd;  // 0 marks a feature held at zero
  std::vector<std::vector<LogisticModel>> models;  // [agent][run]

  std::size_t agents() const { return agent_ids.size(); }
  std::size_t runs() const { return models.empty() ? 0 : models.front().size(); }
  std::vector<double> Standardize(std::span<const double> raw) const;
};

struct TrainOptions {
  std::size_t n = 0;   // simulated items per run
  int m = 20;          // runs
  std::uint64_t seed = 0;
  int threads = 1;
  LassoOptions lasso;
};

// Feature scaling comes from the historical pool itself; every run draws on
// stream (seed, 0, r).
Ensemble TrainEnsemble(const HistoricalPool& pool, const AgentPool& agents,
                       const TrainOptions& options);

// Averaged per-agent probability; entries need not sum to one.
std::vector<double> Predict(const Ensemble& ensemble, std::span<const double> costs,
                            std::span<const double> quantiles);

Recommendation AssignPredicted(const DynamicState& state, std::span<const double> costs,
                               std::span<const double> quantiles,
                               const Ensemble& ensemble);

// Portable binary layout, all integers and doubles little-endian:
//   "DAEN" u32 version
//   u32 agents, per agent: u32 length + bytes of the id
//   u32 features, f64[features] mean, f64[features] sd
//   u32 runs, per agent per run: f64 intercept, f64 penalty, u8 constant,
//     u32 weights + f64[weights], u32 cv points + (f64 penalty, f64 loss)[]
void SaveEnsemble(const Ensemble& ensemble, std::ostream& out);
Ensemble LoadEnsemble(std::istream& in);
void SaveEnsembleFile(const Ensemble& ensemble, const std::string& path);
Ensemble LoadEnsembleFile(const std::string& path);

// Line-oriented summary: one `agent` line per agent with nonzero-weight
// counts per run, then `cv` lines with the validation curve of each model.
void WriteEnsembleSummary(const Ensemble& ensemble, std::ostream& out);

}  // namespace dynassign
