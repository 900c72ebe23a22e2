#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's solvers: every optimum is found by plain enumeration.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace dynassign::oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum over all capacity-respecting maps rows -> agents of the row-order
// sum of costs. Empty `rows` gives 0; infeasible gives +inf.
inline double CapacitatedOptimum(const std::vector<std::vector<double>>& rows,
                                 std::vector<int> caps) {
  std::vector<int> pick(rows.size(), -1);
  double best = kInf;
  auto dfs = [&](auto&& self, std::size_t i) -> void {
    if (i == rows.size()) {
      double total = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        total += rows[r][static_cast<std::size_t>(pick[r])];
      }
      if (total < best) best = total;
      return;
    }
    for (std::size_t a = 0; a < caps.size(); ++a) {
      if (caps[a] == 0) continue;
      --caps[a];
      pick[i] = static_cast<int>(a);
      self(self, i + 1);
      ++caps[a];
    }
  };
  dfs(dfs, 0);
  return best;
}

// Every pool-index sequence of length `len`, most significant index first.
inline std::vector<std::vector<std::size_t>> AllSequences(std::size_t pool_size,
                                                          std::size_t len) {
  std::vector<std::vector<std::size_t>> out{{}};
  for (std::size_t k = 0; k < len; ++k) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& prefix : out) {
      for (std::size_t v = 0; v < pool_size; ++v) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

struct ExpectedSigma {
  std::vector<double> sigma_bar;  // +inf for agents without capacity
  std::vector<std::vector<double>> per_sequence;  // [seq][agent]
  std::vector<double> psi;  // per sequence optimum including the arrival
};

// Expected conditional cost of fixing the arrival to each agent, averaged
// over every equally likely future of `horizon` pool draws. `observed` rows
// precede the simulated ones in every future.
inline ExpectedSigma BruteForceSigma(
    std::span<const double> arrival, const std::vector<int>& caps,
    const std::vector<std::vector<double>>& pool, std::size_t horizon,
    const std::vector<std::vector<double>>& observed = {}) {
  const std::size_t n = arrival.size();
  const auto seqs = AllSequences(pool.size(), horizon);
  ExpectedSigma out;
  out.sigma_bar.assign(n, 0.0);
  for (const auto& seq : seqs) {
    std::vector<std::vector<double>> future = observed;
    for (std::size_t k : seq) future.push_back(pool[k]);
    std::vector<double> row(n, kInf);
    for (std::size_t a = 0; a < n; ++a) {
      if (caps[a] == 0) continue;
      auto reduced = caps;
      --reduced[a];
      row[a] = arrival[a] + CapacitatedOptimum(future, reduced);
    }
    std::vector<std::vector<double>> with_arrival{{arrival.begin(), arrival.end()}};
    with_arrival.insert(with_arrival.end(), future.begin(), future.end());
    out.psi.push_back(CapacitatedOptimum(with_arrival, caps));
    out.per_sequence.push_back(row);
  }
  for (std::size_t a = 0; a < n; ++a) {
    double sum = 0.0;
    for (const auto& row : out.per_sequence) sum += row[a];
    out.sigma_bar[a] = sum / static_cast<double>(seqs.size());
  }
  return out;
}

struct TupleExpectation {
  std::vector<int> agents;
  double mean_cost = 0.0;
};

// Expected cost of every capacity-feasible agent tuple for a batch: the
// batch's own costs plus the optimum of `horizon` post-batch pool draws on
// the capacity left over, averaged over all equally likely futures.
inline std::vector<TupleExpectation> BruteForceTuples(
    const std::vector<std::vector<double>>& batch, const std::vector<int>& caps,
    const std::vector<std::vector<double>>& pool, std::size_t horizon) {
  std::vector<TupleExpectation> out;
  std::vector<int> left = caps;
  std::vector<int> tuple(batch.size());
  const auto seqs = AllSequences(pool.size(), horizon);
  auto rec = [&](auto&& self, std::size_t d) -> void {
    if (d == batch.size()) {
      double own = 0.0;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        own += batch[k][static_cast<std::size_t>(tuple[k])];
      }
      double sum = 0.0;
      for (const auto& seq : seqs) {
        std::vector<std::vector<double>> future;
        for (std::size_t k : seq) future.push_back(pool[k]);
        sum += own + CapacitatedOptimum(future, left);
      }
      out.push_back({tuple, sum / static_cast<double>(seqs.size())});
      return;
    }
    for (std::size_t a = 0; a < left.size(); ++a) {
      if (left[a] == 0) continue;
      --left[a];
      tuple[d] = static_cast<int>(a);
      self(self, d + 1);
      ++left[a];
    }
  };
  rec(rec, 0);
  return out;
}

// Mean over futures of (sigma of `chosen`) minus the unconstrained optimum.
inline double BruteForceExpectedLoss(const ExpectedSigma& sigma, int chosen) {
  double total = 0.0;
  for (std::size_t s = 0; s < sigma.psi.size(); ++s) {
    total += sigma.per_sequence[s][static_cast<std::size_t>(chosen)] - sigma.psi[s];
  }
  return total / static_cast<double>(sigma.psi.size());
}

}  // namespace dynassign::oracle
