#include "dynassign/predictor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "dynassign/error.hpp"
#include "parallel.hpp"

namespace dynassign {
namespace {

constexpr double kMinWeight = 1e-5;
constexpr int kMaxIrls = 25;
constexpr int kMaxPasses = 1000;
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kSaturation = 1e-3;
constexpr double kMinDevianceGain = 1e-5;
constexpr std::size_t kMinPathSteps = 5;

double Sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double Logit(double p) { return std::log(p / (1.0 - p)); }

double SoftThreshold(double u, double penalty) {
  if (u > penalty) return u - penalty;
  if (u < -penalty) return u + penalty;
  return 0.0;
}

double LogLoss(double p, std::uint8_t y) {
  constexpr double kEps = 1e-15;
  p = std::clamp(p, kEps, 1.0 - kEps);
  return y ? -std::log(p) : -std::log(1.0 - p);
}

double PositiveRate(const LassoProblem& problem) {
  double pos = 0.0;
  for (auto v : problem.y) pos += v;
  return pos / static_cast<double>(problem.rows);
}

// Column-major copy of the selected rows.
struct Subset {
  std::vector<double> x;
  std::vector<std::uint8_t> y;
  LassoProblem problem;
};

Subset Select(const LassoProblem& problem, const std::vector<std::size_t>& rows) {
  Subset s;
  s.x.resize(rows.size() * problem.cols);
  s.y.resize(rows.size());
  for (std::size_t j = 0; j < problem.cols; ++j) {
    const double* col = problem.x.data() + j * problem.rows;
    double* dst = s.x.data() + j * rows.size();
    for (std::size_t k = 0; k < rows.size(); ++k) dst[k] = col[rows[k]];
  }
  for (std::size_t k = 0; k < rows.size(); ++k) s.y[k] = problem.y[rows[k]];
  s.problem = {rows.size(), problem.cols, s.x, s.y};
  return s;
}

double Deviance(const LassoProblem& problem, const LassoFit& fit);

// Fits grid[0..last] with warm starts, calling visit(k, fit) for each. The
// path freezes once the fit explains 99.9% of the null deviance or a step
// past the fifth gains less than 1e-5 of it; later penalties reuse the
// frozen fit.
template <typename Visit>
LassoFit FitPath(const LassoProblem& problem, const std::vector<double>& grid,
                 std::size_t last, Visit&& visit) {
  LassoFit null_fit;
  null_fit.weights.assign(problem.cols, 0.0);
  null_fit.intercept = Logit(PositiveRate(problem));
  const double null_dev = Deviance(problem, null_fit);
  LassoFit fit;
  bool frozen = false;
  double previous = null_dev;
  for (std::size_t k = 0; k <= last; ++k) {
    if (!frozen) {
      fit = FitLasso(problem, grid[k], k == 0 ? nullptr : &fit);
      const double dev = Deviance(problem, fit);
      frozen = dev <= kSaturation * null_dev ||
               (k >= kMinPathSteps && previous - dev < kMinDevianceGain * null_dev);
      previous = dev;
    }
    visit(k, fit);
  }
  return fit;
}

double PredictColumnMajor(const LassoProblem& problem, const LassoFit& fit,
                          std::size_t row) {
  double eta = fit.intercept;
  for (std::size_t j = 0; j < problem.cols; ++j) {
    if (fit.weights[j] != 0.0) eta += fit.weights[j] * problem.x[j * problem.rows + row];
  }
  return Sigmoid(eta);
}

double Deviance(const LassoProblem& problem, const LassoFit& fit) {
  double total = 0.0;
  for (std::size_t i = 0; i < problem.rows; ++i) {
    total += LogLoss(PredictColumnMajor(problem, fit, i), problem.y[i]);
  }
  return 2.0 * total;
}

// Little-endian primitives.
void PutU32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 4);
}

void PutF64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 8);
}

void ReadExact(std::istream& in, char* buf, std::size_t len) {
  in.read(buf, static_cast<std::streamsize>(len));
  if (static_cast<std::size_t>(in.gcount()) != len) ThrowIo("truncated ensemble data");
}

std::uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  ReadExact(in, reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

double GetF64(std::istream& in) {
  unsigned char b[8];
  ReadExact(in, reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

// Upper bound on counts read from untrusted input.
constexpr std::uint32_t kMaxCount = 1u << 26;

std::uint32_t GetCount(std::istream& in) {
  const std::uint32_t n = GetU32(in);
  if (n > kMaxCount) ThrowIo("implausible count in ensemble data");
  return n;
}

void CheckTraining(const HistoricalPool& pool, const AgentPool& agents, std::size_t n) {
  if (pool.dim() != agents.size()) {
    ThrowValidation("pool dimension does not match agent count");
  }
  if (n == 0) ThrowValidation("training runs need at least one item");
  if (agents.TotalCapacity() < static_cast<long>(n)) {
    ThrowInfeasible("total capacity " + std::to_string(agents.TotalCapacity()) +
                    " is below the " + std::to_string(n) + " simulated items");
  }
}

// Optimal agents for `n` pool draws on `stream`.
void LabelRun(const HistoricalPool& pool, const AgentPool& agents, std::size_t n,
              const DrawStream& stream, std::vector<std::size_t>& idx,
              std::vector<int>& labels) {
  DrawIndices(pool, n, stream, idx);
  std::vector<const double*> rows;
  rows.reserve(n);
  for (std::size_t k : idx) rows.push_back(pool.data(k));
  CapacitatedLap lap;
  lap.Solve(rows, agents.capacities);
  labels.assign(lap.row_agent().begin(), lap.row_agent().end());
}

}  // namespace

std::size_t FeatureCount(std::size_t agents) {
  const std::size_t base = 2 * agents;
  return base + base * (base - 1) / 2;
}

std::vector<double> BuildFeatures(std::span<const double> costs,
                                  std::span<const double> quantiles) {
  if (costs.size() != quantiles.size()) {
    ThrowValidation("cost and quantile vectors differ in length");
  }
  std::vector<double> out;
  out.reserve(FeatureCount(costs.size()));
  out.insert(out.end(), costs.begin(), costs.end());
  out.insert(out.end(), quantiles.begin(), quantiles.end());
  const std::size_t base = out.size();
  for (std::size_t a = 0; a < base; ++a) {
    for (std::size_t b = a + 1; b < base; ++b) out.push_back(out[a] * out[b]);
  }
  return out;
}

TrainingSet SimulateTrainingRun(const HistoricalPool& pool, const QuantileTable& table,
                                const AgentPool& agents, std::size_t n,
                                const DrawStream& stream) {
  CheckTraining(pool, agents, n);
  std::vector<std::size_t> idx;
  TrainingSet set;
  LabelRun(pool, agents, n, stream, idx, set.y);
  set.dim = FeatureCount(pool.dim());
  set.x.reserve(n * set.dim);
  for (std::size_t k : idx) {
    const auto c = pool.vector(k);
    const auto f = BuildFeatures(c, table.QuantileVector(c));
    set.x.insert(set.x.end(), f.begin(), f.end());
  }
  return set;
}

double LambdaMax(const LassoProblem& problem) {
  if (problem.rows == 0) ThrowValidation("lasso problem has no rows");
  const double ybar = PositiveRate(problem);
  double raw = 0.0;
  for (std::size_t j = 0; j < problem.cols; ++j) {
    const double* col = problem.x.data() + j * problem.rows;
    double g = 0.0;
    for (std::size_t i = 0; i < problem.rows; ++i) g += col[i] * (problem.y[i] - ybar);
    raw = std::max(raw, std::abs(g) / static_cast<double>(problem.rows));
  }
  if (raw <= 1e-12) return 0.0;
  return raw * (1.0 + 1e-9) + 1e-13;
}

LassoFit FitLasso(const LassoProblem& problem, double penalty, const LassoFit* warm) {
  const std::size_t n = problem.rows;
  const std::size_t p = problem.cols;
  if (n == 0) ThrowValidation("lasso problem has no rows");
  if (!(penalty >= 0.0)) ThrowValidation("penalty must be nonnegative");
  const auto nd = static_cast<double>(n);
  LassoFit fit;
  fit.penalty = penalty;
  if (warm != nullptr && warm->weights.size() == p) {
    fit.intercept = warm->intercept;
    fit.weights = warm->weights;
  } else {
    fit.weights.assign(p, 0.0);
    fit.intercept = Logit(std::clamp(PositiveRate(problem), kMinWeight, 1.0 - kMinWeight));
  }

  std::vector<double> eta(n), w(n), r(n), xw2(p);
  std::vector<double> before(p + 1);
  std::vector<std::uint8_t> active(p);
  for (int iter = 0; iter < kMaxIrls; ++iter) {
    std::fill(eta.begin(), eta.end(), fit.intercept);
    for (std::size_t j = 0; j < p; ++j) {
      if (fit.weights[j] == 0.0) continue;
      const double* col = problem.x.data() + j * n;
      for (std::size_t i = 0; i < n; ++i) eta[i] += fit.weights[j] * col[i];
    }
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double prob = Sigmoid(eta[i]);
      w[i] = std::max(prob * (1.0 - prob), kMinWeight);
      r[i] = (problem.y[i] - prob) / w[i];
      wsum += w[i];
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double* col = problem.x.data() + j * n;
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w[i] * col[i] * col[i];
      xw2[j] = s / nd;
    }
    before[p] = fit.intercept;
    std::copy(fit.weights.begin(), fit.weights.end(), before.begin());

    // Weighted least squares by coordinate descent; full sweeps alternate
    // with sweeps over the current nonzero set.
    bool full = true;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
      double delta = 0.0;
      double shift = 0.0;
      for (std::size_t i = 0; i < n; ++i) shift += w[i] * r[i];
      shift /= wsum;
      if (shift != 0.0) {
        fit.intercept += shift;
        for (std::size_t i = 0; i < n; ++i) r[i] -= shift;
        delta = wsum / nd * shift * shift;
      }
      for (std::size_t j = 0; j < p; ++j) {
        if (xw2[j] <= 0.0 || (!full && !active[j])) continue;
        const double* col = problem.x.data() + j * n;
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += w[i] * col[i] * r[i];
        const double old = fit.weights[j];
        const double next = SoftThreshold(g / nd + xw2[j] * old, penalty) / xw2[j];
        if (next != old) {
          const double d = next - old;
          for (std::size_t i = 0; i < n; ++i) r[i] -= d * col[i];
          fit.weights[j] = next;
          delta = std::max(delta, xw2[j] * d * d);
        }
        active[j] = next != 0.0;
      }
      if (delta < kLassoTolerance) {
        if (full) break;
        full = true;
      } else {
        full = false;
      }
    }

    const double d0 = fit.intercept - before[p];
    double change = wsum / nd * d0 * d0;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = fit.weights[j] - before[j];
      change = std::max(change, xw2[j] * d * d);
    }
    if (change < kLassoTolerance) break;
  }
  return fit;
}

double LogisticModel::Predict(std::span<const double> standardized) const {
  if (standardized.size() != weights.size()) {
    ThrowValidation("feature vector length does not match the model");
  }
  double eta = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] != 0.0) eta += weights[j] * standardized[j];
  }
  return Sigmoid(eta);
}

std::size_t LogisticModel::NonZero() const {
  return static_cast<std::size_t>(
      std::count_if(weights.begin(), weights.end(), [](double w) { return w != 0.0; }));
}

LogisticModel FitLassoLogistic(const LassoProblem& problem, const LassoOptions& options,
                               double min_rate) {
  if (options.folds < 2 || options.grid < 1 || !(options.min_ratio > 0.0)) {
    ThrowValidation("invalid lasso options");
  }
  LogisticModel model;
  model.weights.assign(problem.cols, 0.0);
  const auto nd = static_cast<double>(problem.rows);
  const double positives = PositiveRate(problem) * nd;
  if (positives == 0.0 || positives == nd || positives / nd < min_rate) {
    model.constant = true;
    model.intercept = Logit((positives + 1.0) / (nd + 2.0));
    return model;
  }
  const double lambda_max = LambdaMax(problem);
  if (lambda_max == 0.0) {
    model.intercept = Logit(positives / nd);
    return model;
  }
  std::vector<double> grid(static_cast<std::size_t>(options.grid));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double frac = grid.size() == 1 ? 0.0 : static_cast<double>(k) /
                                                    static_cast<double>(grid.size() - 1);
    grid[k] = lambda_max * std::pow(options.min_ratio, frac);
  }

  // Fold of row i is i mod k.
  const auto folds = static_cast<std::size_t>(options.folds);
  std::vector<double> loss(grid.size(), 0.0);
  std::size_t used_folds = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, valid;
    for (std::size_t i = 0; i < problem.rows; ++i) (i % folds == f ? valid : train).push_back(i);
    if (valid.empty() || train.empty()) continue;
    ++used_folds;
    const Subset tr = Select(problem, train);
    const Subset va = Select(problem, valid);
    const double rate = PositiveRate(tr.problem);
    if (rate == 0.0 || rate == 1.0) {
      const double c = (rate * static_cast<double>(train.size()) + 1.0) /
                       (static_cast<double>(train.size()) + 2.0);
      double l = 0.0;
      for (auto y : va.y) l += LogLoss(c, y);
      for (auto& x : loss) x += l / static_cast<double>(valid.size());
      continue;
    }
    FitPath(tr.problem, grid, grid.size() - 1, [&](std::size_t k, const LassoFit& fit) {
      double l = 0.0;
      for (std::size_t i = 0; i < valid.size(); ++i) {
        l += LogLoss(PredictColumnMajor(va.problem, fit, i), va.y[i]);
      }
      loss[k] += l / static_cast<double>(valid.size());
    });
  }
  std::size_t best = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    loss[k] /= static_cast<double>(std::max<std::size_t>(used_folds, 1));
    if (loss[k] < loss[best]) best = k;
    model.cv.push_back({grid[k], loss[k]});
  }
  LassoFit fit = FitPath(problem, grid, best, [](std::size_t, const LassoFit&) {});
  model.intercept = fit.intercept;
  model.weights = std::move(fit.weights);
  model.penalty = grid[best];
  return model;
}

std::vector<double> Ensemble::Standardize(std::span<const double> raw) const {
  if (raw.size() != feature_mean.size()) {
    ThrowValidation("feature vector length does not match the ensemble");
  }
  std::vector<double> out(raw.size(), 0.0);
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (feature_sd[j] > 0.0) out[j] = (raw[j] - feature_mean[j]) / feature_sd[j];
  }
  return out;
}

Ensemble TrainEnsemble(const HistoricalPool& pool, const AgentPool& agents,
                       const TrainOptions& options) {
  CheckTraining(pool, agents, options.n);
  if (options.m < 1) ThrowValidation("ensemble needs m >= 1 runs");
  if (options.threads < 1) ThrowValidation("threads must be >= 1");
  const QuantileTable table(pool);
  const std::size_t dim = FeatureCount(pool.dim());
  const std::size_t nagents = agents.size();

  Ensemble ens;
  ens.agent_ids = agents.agents;
  std::vector<std::vector<double>> pool_features(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto c = pool.vector(k);
    pool_features[k] = BuildFeatures(c, table.QuantileVector(c));
  }
  ens.feature_mean.assign(dim, 0.0);
  ens.feature_sd.assign(dim, 0.0);
  for (const auto& f : pool_features) {
    for (std::size_t j = 0; j < dim; ++j) ens.feature_mean[j] += f[j];
  }
  for (auto& m : ens.feature_mean) m /= static_cast<double>(pool.size());
  if (pool.size() > 1) {
    for (const auto& f : pool_features) {
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = f[j] - ens.feature_mean[j];
        ens.feature_sd[j] += d * d;
      }
    }
    for (auto& s : ens.feature_sd) {
      s = std::sqrt(s / static_cast<double>(pool.size() - 1));
      if (s < 1e-12) s = 0.0;
    }
  }
  std::vector<std::vector<double>> scaled(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) scaled[k] = ens.Standardize(pool_features[k]);

  const auto runs = static_cast<std::size_t>(options.m);
  const double min_rate = 1.0 / (10.0 * static_cast<double>(nagents));
  ens.models.assign(nagents, std::vector<LogisticModel>(runs));
  internal::ParallelChunks(runs, options.threads,
                           [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx;
    std::vector<int> labels;
    std::vector<double> x;
    std::vector<std::uint8_t> y(options.n);
    for (std::size_t r = begin; r < end; ++r) {
      LabelRun(pool, agents, options.n, DrawStream{options.seed, 0, r}, idx, labels);
      x.assign(options.n * dim, 0.0);
      for (std::size_t i = 0; i < options.n; ++i) {
        const auto& f = scaled[idx[i]];
        for (std::size_t j = 0; j < dim; ++j) x[j * options.n + i] = f[j];
      }
      const LassoProblem base{options.n, dim, x, y};
      for (std::size_t a = 0; a < nagents; ++a) {
        for (std::size_t i = 0; i < options.n; ++i) {
          y[i] = labels[i] == static_cast<int>(a) ? 1 : 0;
        }
        ens.models[a][r] = FitLassoLogistic(base, options.lasso, min_rate);
      }
    }
  });
  return ens;
}

std::vector<double> Predict(const Ensemble& ensemble, std::span<const double> costs,
                            std::span<const double> quantiles) {
  if (costs.size() != ensemble.agents() || quantiles.size() != ensemble.agents()) {
    ThrowValidation("vector length does not match the ensemble's " +
                    std::to_string(ensemble.agents()) + " agents");
  }
  const auto x = ensemble.Standardize(BuildFeatures(costs, quantiles));
  std::vector<double> out(ensemble.agents(), 0.0);
  for (std::size_t a = 0; a < ensemble.agents(); ++a) {
    double sum = 0.0;
    for (const auto& model : ensemble.models[a]) sum += model.Predict(x);
    out[a] = sum / static_cast<double>(ensemble.models[a].size());
  }
  return out;
}

Recommendation AssignPredicted(const DynamicState& state, std::span<const double> costs,
                               std::span<const double> quantiles,
                               const Ensemble& ensemble) {
  if (state.closed()) ThrowValidation("assignment state is closed");
  if (costs.size() != state.agents()) ThrowValidation("arrival vector length mismatch");
  for (double c : costs) {
    if (!std::isfinite(c)) ThrowValidation("arrival vector has a non-finite entry");
  }
  const auto candidates = state.Candidates();
  if (candidates.empty()) ThrowInfeasible("no agent with remaining capacity");
  const auto prob = Predict(ensemble, costs, quantiles);
  Recommendation rec;
  rec.kind = MechanismKind::kPredicted;
  rec.draws_used = static_cast<int>(ensemble.runs());
  for (int a : candidates) {
    const double p = prob[static_cast<std::size_t>(a)];
    rec.per_agent_score.push_back({a, p});
    if (rec.chosen_agent < 0 || p > prob[static_cast<std::size_t>(rec.chosen_agent)]) {
      rec.chosen_agent = a;
    }
  }
  return rec;
}

void SaveEnsemble(const Ensemble& ensemble, std::ostream& out) {
  out.write("DAEN", 4);
  PutU32(out, kFormatVersion);
  PutU32(out, static_cast<std::uint32_t>(ensemble.agents()));
  for (const auto& id : ensemble.agent_ids) {
    PutU32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  PutU32(out, static_cast<std::uint32_t>(ensemble.feature_mean.size()));
  for (double v : ensemble.feature_mean) PutF64(out, v);
  for (double v : ensemble.feature_sd) PutF64(out, v);
  PutU32(out, static_cast<std::uint32_t>(ensemble.runs()));
  for (const auto& per_agent : ensemble.models) {
    for (const auto& model : per_agent) {
      PutF64(out, model.intercept);
      PutF64(out, model.penalty);
      out.put(model.constant ? 1 : 0);
      PutU32(out, static_cast<std::uint32_t>(model.weights.size()));
      for (double w : model.weights) PutF64(out, w);
      PutU32(out, static_cast<std::uint32_t>(model.cv.size()));
      for (const auto& point : model.cv) {
        PutF64(out, point.penalty);
        PutF64(out, point.loss);
      }
    }
  }
  if (!out) ThrowIo("failed to write ensemble");
}

Ensemble LoadEnsemble(std::istream& in) {
  char magic[4];
  ReadExact(in, magic, 4);
  if (std::string(magic, 4) != "DAEN") ThrowIo("not an ensemble file");
  const std::uint32_t version = GetU32(in);
  if (version != kFormatVersion) {
    ThrowIo("unsupported ensemble format version " + std::to_string(version));
  }
  Ensemble ens;
  const std::uint32_t agents = GetCount(in);
  for (std::uint32_t a = 0; a < agents; ++a) {
    std::string id(GetCount(in), '\0');
    ReadExact(in, id.data(), id.size());
    ens.agent_ids.push_back(std::move(id));
  }
  const std::uint32_t dim = GetCount(in);
  if (agents > 0 && dim != FeatureCount(agents)) ThrowIo("feature count does not match agents");
  ens.feature_mean.resize(dim);
  ens.feature_sd.resize(dim);
  for (auto& v : ens.feature_mean) v = GetF64(in);
  for (auto& v : ens.feature_sd) v = GetF64(in);
  const std::uint32_t runs = GetCount(in);
  ens.models.assign(agents, std::vector<LogisticModel>(runs));
  for (auto& per_agent : ens.models) {
    for (auto& model : per_agent) {
      model.intercept = GetF64(in);
      model.penalty = GetF64(in);
      char flag = 0;
      ReadExact(in, &flag, 1);
      model.constant = flag != 0;
      model.weights.resize(GetCount(in));
      if (model.weights.size() != dim) ThrowIo("model weight count does not match features");
      for (auto& w : model.weights) w = GetF64(in);
      model.cv.resize(GetCount(in));
      for (auto& point : model.cv) {
        point.penalty = GetF64(in);
        point.loss = GetF64(in);
      }
    }
  }
  return ens;
}

void SaveEnsembleFile(const Ensemble& ensemble, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open '" + path + "' for writing");
  SaveEnsemble(ensemble, out);
}

Ensemble LoadEnsembleFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open '" + path + "'");
  return LoadEnsemble(in);
}

void WriteEnsembleSummary(const Ensemble& ensemble, std::ostream& out) {
  const auto old = out.precision(17);
  out << "ensemble agents=" << ensemble.agents() << " runs=" << ensemble.runs()
      << " features=" << ensemble.feature_mean.size() << '\n';
  for (std::size_t a = 0; a < ensemble.agents(); ++a) {
    out << "agent " << ensemble.agent_ids[a] << " nonzero=";
    std::size_t constants = 0;
    for (std::size_t r = 0; r < ensemble.models[a].size(); ++r) {
      out << (r ? "," : "") << ensemble.models[a][r].NonZero();
      constants += ensemble.models[a][r].constant;
    }
    out << " constant=" << constants << '\n';
  }
  for (std::size_t a = 0; a < ensemble.agents(); ++a) {
    for (std::size_t r = 0; r < ensemble.models[a].size(); ++r) {
      const auto& model = ensemble.models[a][r];
      out << "cv " << ensemble.agent_ids[a] << " run=" << r << " selected=" << model.penalty;
      for (const auto& point : model.cv) out << ' ' << point.penalty << ':' << point.loss;
      out << '\n';
    }
  }
  out.precision(old);
}

}  // namespace dynassign
