#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dynassign {

// Dense row-major grid of finite costs. Rows are items, columns are capacity
// units (or agents, before expansion).
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static CostMatrix FromRows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const { return values_; }

  // Identifiers default to "1".."rows" and "1".."cols".
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_ids() const { return col_ids_; }
  void set_row_ids(std::vector<std::string> ids);
  void set_col_ids(std::vector<std::string> ids);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
};

struct Assignment {
  std::vector<int> row_to_col;  // one entry per row, distinct columns
  double total_cost = 0.0;
};

// Agents with integer capacities z_j. Agent order defines the agent index
// used everywhere else in the library, and "lowest agent id" tie-breaking
// refers to this order.
struct AgentPool {
  std::vector<std::string> agents;
  std::vector<int> capacities;

  AgentPool() = default;
  AgentPool(std::vector<std::string> agent_ids, std::vector<int> caps);

  std::size_t size() const { return agents.size(); }
  long TotalCapacity() const;
  int IndexOf(const std::string& agent_id) const;  // -1 when unknown
};

// Minimum-cost assignment of every row to a distinct column, rows <= cols.
// Shortest augmenting path with row/column duals, O(rows^2 * cols). Columns
// are scanned in ascending order and only a strictly smaller reduced cost
// displaces the incumbent, which fixes the optimum chosen among ties.
Assignment Solve(const CostMatrix& matrix);

// Exhaustive search over all injections; cols <= 8. Test oracle.
Assignment BruteForceSolve(const CostMatrix& matrix);

struct ExpandedMatrix {
  CostMatrix matrix;
  std::vector<int> unit_to_agent;
};

// Duplicates every agent column z_j times so that capacity units become
// ordinary LAP columns.
ExpandedMatrix ExpandCapacity(const CostMatrix& costs_over_agents,
                              const AgentPool& pool);

// Agent-level solver for the capacitated problem: rows are items, columns are
// agents with integer capacities. Equivalent to Solve() on the expanded
// matrix but the shortest-path search runs over agents, so the work per
// augmentation is O(rows * agents) instead of O(rows * units).
//
// The object owns its workspace; reuse one instance per thread.
class CapacitatedLap {
 public:
  // `rows[i]` points at `capacities.size()` costs. When `first_row_allowed`
  // is non-empty, row 0 may only be placed on agents flagged non-zero.
  // Returns the optimal total cost. Throws kInfeasible when the rows cannot
  // all be placed.
  double Solve(std::span<const double* const> rows,
               std::span<const int> capacities,
               std::span<const std::uint8_t> first_row_allowed = {});

  // Agent chosen for each row by the last Solve().
  std::span<const int> row_agent() const { return row_agent_; }

  // For each agent, the increase of the optimal cost from the last Solve()
  // if that agent lost one unit of capacity. Zero for agents with spare
  // units, +inf for agents with no capacity or when the reduced problem is
  // infeasible. Computed by re-routing one item out of the agent along a
  // cheapest chain of moves ending at an agent with slack.
  void UnitRemovalDeltas(std::span<double> out) const;

 private:
  std::size_t n_agents_ = 0;
  std::vector<const double*> rows_;
  std::vector<int> caps_;
  std::vector<int> used_;
  std::vector<std::vector<int>> agent_items_;
  std::vector<int> row_agent_;
  std::vector<double> potential_;
  std::vector<double> dist_;
  std::vector<int> prev_agent_;
  std::vector<int> prev_item_;
  std::vector<std::uint8_t> settled_;
  std::vector<std::uint8_t> allowed_;
  mutable std::vector<double> chain_;
  mutable std::vector<double> move_cost_;
};

}  // namespace dynassign
