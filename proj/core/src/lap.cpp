#include "dynassign/lap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dynassign/error.hpp"

namespace dynassign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> DefaultIds(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i + 1);
  return ids;
}

void CheckFinite(std::span<const double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      ThrowValidation("cost matrix entry " + std::to_string(k) +
                      " is not finite");
    }
  }
}

double SumAlong(const CostMatrix& m, const std::vector<int>& row_to_col) {
  double total = 0.0;
  for (std::size_t r = 0; r < row_to_col.size(); ++r) {
    total += m(r, static_cast<std::size_t>(row_to_col[r]));
  }
  return total;
}

}  // namespace

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
      return "validation";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    ThrowValidation("cost matrix has " + std::to_string(values_.size()) +
                    " entries, expected " + std::to_string(rows_ * cols_));
  }
  CheckFinite(values_);
  row_ids_ = DefaultIds(rows_);
  col_ids_ = DefaultIds(cols_);
}

CostMatrix CostMatrix::FromRows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.front().size();
  std::vector<double> flat;
  flat.reserve(n * m);
  for (const auto& row : rows) {
    if (row.size() != m) ThrowValidation("ragged cost matrix rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return CostMatrix(n, m, std::move(flat));
}

void CostMatrix::set_row_ids(std::vector<std::string> ids) {
  if (ids.size() != rows_) ThrowValidation("row id count mismatch");
  row_ids_ = std::move(ids);
}

void CostMatrix::set_col_ids(std::vector<std::string> ids) {
  if (ids.size() != cols_) ThrowValidation("column id count mismatch");
  col_ids_ = std::move(ids);
}

AgentPool::AgentPool(std::vector<std::string> agent_ids, std::vector<int> caps)
    : agents(std::move(agent_ids)), capacities(std::move(caps)) {
  if (agents.size() != capacities.size()) {
    ThrowValidation("agent and capacity counts differ");
  }
  for (int z : capacities) {
    if (z < 0) ThrowValidation("negative capacity");
  }
}

long AgentPool::TotalCapacity() const {
  return std::accumulate(capacities.begin(), capacities.end(), 0L);
}

int AgentPool::IndexOf(const std::string& agent_id) const {
  auto it = std::find(agents.begin(), agents.end(), agent_id);
  return it == agents.end() ? -1 : static_cast<int>(it - agents.begin());
}

Assignment Solve(const CostMatrix& matrix) {
  const std::size_t n = matrix.rows();
  const std::size_t m = matrix.cols();
  CheckFinite(matrix.values());
  if (n > m) {
    ThrowInfeasible(std::to_string(n) + " items but only " +
                    std::to_string(m) + " capacity units");
  }
  Assignment result;
  if (n == 0) return result;

  // 1-based arrays; column 0 is the virtual root of each search.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> owner(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = static_cast<int>(i);
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const auto i0 = static_cast<std::size_t>(owner[j0]);
      const double* row = matrix.row(i0 - 1).data();
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = static_cast<int>(j0);
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[static_cast<std::size_t>(owner[j])] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const auto j1 = static_cast<std::size_t>(way[j0]);
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.row_to_col.assign(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) {
      result.row_to_col[static_cast<std::size_t>(owner[j]) - 1] =
          static_cast<int>(j) - 1;
    }
  }
  result.total_cost = SumAlong(matrix, result.row_to_col);
  return result;
}

Assignment BruteForceSolve(const CostMatrix& matrix) {
  const std::size_t n = matrix.rows();
  const std::size_t m = matrix.cols();
  CheckFinite(matrix.values());
  if (m > 8) ThrowValidation("brute force limited to 8 columns");
  if (n > m) ThrowInfeasible("more rows than columns");

  Assignment best;
  best.total_cost = kInf;
  std::vector<int> current(n, -1);
  std::vector<char> taken(m, 0);

  // Depth-first in lexicographic column order; a later injection replaces
  // the incumbent only when strictly cheaper.
  auto recurse = [&](auto&& self, std::size_t r, double partial) -> void {
    if (r == n) {
      if (partial < best.total_cost) {
        best.total_cost = partial;
        best.row_to_col = current;
      }
      return;
    }
    for (std::size_t c = 0; c < m; ++c) {
      if (taken[c]) continue;
      taken[c] = 1;
      current[r] = static_cast<int>(c);
      self(self, r + 1, partial + matrix(r, c));
      taken[c] = 0;
    }
  };
  recurse(recurse, 0, 0.0);
  if (n == 0) best.total_cost = 0.0;
  // Report the row-order sum so that totals compare bit-for-bit with Solve.
  best.total_cost = SumAlong(matrix, best.row_to_col);
  return best;
}

ExpandedMatrix ExpandCapacity(const CostMatrix& costs_over_agents,
                              const AgentPool& pool) {
  if (costs_over_agents.cols() != pool.size()) {
    ThrowValidation("cost columns do not match agent count");
  }
  const long units = pool.TotalCapacity();
  if (units < static_cast<long>(costs_over_agents.rows())) {
    ThrowInfeasible("total capacity " + std::to_string(units) +
                    " is below item count " +
                    std::to_string(costs_over_agents.rows()));
  }
  ExpandedMatrix out;
  out.unit_to_agent.reserve(static_cast<std::size_t>(units));
  std::vector<std::string> unit_ids;
  for (std::size_t a = 0; a < pool.size(); ++a) {
    for (int k = 0; k < pool.capacities[a]; ++k) {
      out.unit_to_agent.push_back(static_cast<int>(a));
      unit_ids.push_back(pool.agents[a] + "#" + std::to_string(k + 1));
    }
  }
  const std::size_t n = costs_over_agents.rows();
  const std::size_t cols = out.unit_to_agent.size();
  std::vector<double> values(n * cols);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t u = 0; u < cols; ++u) {
      values[i * cols + u] =
          costs_over_agents(i, static_cast<std::size_t>(out.unit_to_agent[u]));
    }
  }
  out.matrix = CostMatrix(n, cols, std::move(values));
  out.matrix.set_row_ids(costs_over_agents.row_ids());
  out.matrix.set_col_ids(std::move(unit_ids));
  return out;
}

double CapacitatedLap::Solve(std::span<const double* const> rows,
                             std::span<const int> capacities,
                             std::span<const std::uint8_t> first_row_allowed) {
  const std::size_t n = capacities.size();
  const std::size_t k = rows.size();
  n_agents_ = n;
  rows_.assign(rows.begin(), rows.end());
  caps_.assign(capacities.begin(), capacities.end());
  used_.assign(n, 0);
  agent_items_.resize(n);
  for (auto& items : agent_items_) items.clear();
  row_agent_.assign(k, -1);
  potential_.assign(n, 0.0);
  dist_.resize(n);
  prev_agent_.resize(n);
  prev_item_.resize(n);
  settled_.resize(n);
  if (first_row_allowed.empty()) {
    allowed_.assign(n, 1);
  } else {
    allowed_.assign(first_row_allowed.begin(), first_row_allowed.end());
  }
  double sink_potential = 0.0;

  for (std::size_t i = 0; i < k; ++i) {
    const double* row = rows_[i];
    for (std::size_t j = 0; j < n; ++j) {
      settled_[j] = caps_[j] > 0 ? 0 : 1;
      const bool ok = caps_[j] > 0 && (i != 0 || allowed_[j]);
      dist_[j] = ok ? row[j] - potential_[j] : kInf;
      prev_agent_[j] = -1;
      prev_item_[j] = static_cast<int>(i);
    }
    double sink_dist = kInf;
    int last = -1;
    for (;;) {
      int j = -1;
      double best = kInf;
      for (std::size_t a = 0; a < n; ++a) {
        if (!settled_[a] && dist_[a] < best) {
          best = dist_[a];
          j = static_cast<int>(a);
        }
      }
      if (j < 0 || best >= sink_dist) break;
      const auto ju = static_cast<std::size_t>(j);
      settled_[ju] = 1;
      if (used_[ju] < caps_[ju]) {
        const double cand = best + potential_[ju] - sink_potential;
        if (cand < sink_dist) {
          sink_dist = cand;
          last = j;
        }
      }
      for (int item : agent_items_[ju]) {
        const double* irow = rows_[static_cast<std::size_t>(item)];
        const double base = best + potential_[ju] - irow[ju];
        for (std::size_t a = 0; a < n; ++a) {
          if (settled_[a] || (item == 0 && !allowed_[a])) continue;
          const double cand = base + irow[a] - potential_[a];
          if (cand < dist_[a]) {
            dist_[a] = cand;
            prev_agent_[a] = j;
            prev_item_[a] = item;
          }
        }
      }
    }
    if (last < 0) {
      ThrowInfeasible("capacitated assignment has no feasible completion");
    }
    // Johnson update, shifted so that unsettled agents and the sink keep
    // their potentials.
    for (std::size_t a = 0; a < n; ++a) {
      if (settled_[a] && caps_[a] > 0 && dist_[a] < sink_dist) {
        potential_[a] += dist_[a] - sink_dist;
      }
    }
    ++used_[static_cast<std::size_t>(last)];
    for (int j = last; j >= 0;) {
      const auto ju = static_cast<std::size_t>(j);
      const int item = prev_item_[ju];
      const int from = prev_agent_[ju];
      if (from >= 0) {
        auto& src = agent_items_[static_cast<std::size_t>(from)];
        auto pos = std::find(src.begin(), src.end(), item);
        *pos = src.back();
        src.pop_back();
      }
      agent_items_[ju].push_back(item);
      row_agent_[static_cast<std::size_t>(item)] = j;
      j = from;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    total += rows_[i][static_cast<std::size_t>(row_agent_[i])];
  }
  return total;
}

void CapacitatedLap::UnitRemovalDeltas(std::span<double> out) const {
  const std::size_t n = n_agents_;
  if (out.size() != n) ThrowValidation("delta buffer size mismatch");
  // move_cost_[a * n + b]: cheapest cost change for moving one of a's items
  // to b. chain_[a]: cheapest sequence of moves that starts by pushing an
  // item out of a and ends at an agent with a spare unit.
  move_cost_.assign(n * n, kInf);
  chain_.assign(n, kInf);
  for (std::size_t a = 0; a < n; ++a) {
    if (caps_[a] > 0 && used_[a] < caps_[a]) chain_[a] = 0.0;
    for (int item : agent_items_[a]) {
      const double* irow = rows_[static_cast<std::size_t>(item)];
      for (std::size_t b = 0; b < n; ++b) {
        if (b == a || caps_[b] <= 0 || (item == 0 && !allowed_[b])) continue;
        move_cost_[a * n + b] = std::min(move_cost_[a * n + b], irow[b] - irow[a]);
      }
    }
  }
  // Bellman-Ford towards the slack set; the residual graph of an optimal
  // solution has no negative cycles, so n rounds suffice.
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (chain_[a] == 0.0 && used_[a] < caps_[a]) continue;
      for (std::size_t b = 0; b < n; ++b) {
        const double w = move_cost_[a * n + b];
        if (w == kInf || chain_[b] == kInf) continue;
        const double cand = w + chain_[b];
        if (cand < chain_[a]) {
          chain_[a] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (caps_[a] <= 0) {
      out[a] = kInf;
    } else if (used_[a] < caps_[a]) {
      out[a] = 0.0;
    } else {
      out[a] = chain_[a];
    }
  }
}

}  // namespace dynassign
