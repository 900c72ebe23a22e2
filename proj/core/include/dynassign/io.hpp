#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dynassign/lap.hpp"
#include "dynassign/stochastic.hpp"

namespace dynassign {

// Direction of the values in input files. kMax means outcome scores where
// larger is better; they are ingested as costs 1 - s.
enum class Direction { kMin, kMax };

const char* ToString(Direction direction);
Direction ParseDirection(const std::string& name);

inline double ToCost(double value, Direction direction) {
  return direction == Direction::kMax ? 1.0 - value : value;
}

// Comma-separated records with optional double-quoted fields. Blank lines
// are skipped; surrounding whitespace of unquoted fields is trimmed.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable ReadCsv(std::istream& in);
double ParseNumber(const std::string& field);

// Header row = agent ids, one row per historical item.
HistoricalPool ReadPoolCsv(std::istream& in, Direction direction);

// Arrivals in file order. Header `item_id[,batch_id],<agent ids>`; agent
// columns are reordered to `agent_ids`.
struct Cohort {
  std::vector<std::string> item_ids;
  std::vector<std::string> batch_ids;  // empty when the file has none
  std::vector<std::vector<double>> vectors;

  std::size_t size() const { return vectors.size(); }
  bool has_batches() const { return !batch_ids.empty(); }
};

Cohort ReadCohortCsv(std::istream& in, Direction direction,
                     const std::vector<std::string>& agent_ids);

// Header `agent,capacity`; result follows the order of `agent_ids`, and
// every agent must appear exactly once.
AgentPool ReadCapacitiesCsv(std::istream& in, const std::vector<std::string>& agent_ids);

// Numeric grid for the static solver. A first row containing a non-numeric
// field is taken as column ids; a first column named `item_id` as row ids.
CostMatrix ReadMatrixCsv(std::istream& in, Direction direction);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes);
std::string HexDigest(std::uint64_t digest);

// Seventeen significant digits (%.17g), enough to parse back exactly.
std::string FormatDouble(double value);

}  // namespace dynassign
