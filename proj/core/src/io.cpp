#include "dynassign/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "dynassign/error.hpp"

namespace dynassign {
namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

bool IsBlank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<std::string> SplitRecord(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"' && !was_quoted && Trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(was_quoted ? field : Trim(field));
      field.clear();
      was_quoted = false;
    } else if (!(was_quoted && (ch == ' ' || ch == '\t' || ch == '\r'))) {
      field.push_back(ch);
    }
  }
  if (quoted) ThrowValidation("unterminated quote on CSV line " + std::to_string(line_no));
  fields.push_back(was_quoted ? field : Trim(field));
  return fields;
}

bool LooksNumeric(const std::string& field) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  return ec == std::errc() && ptr == end && !field.empty();
}

std::vector<double> ParseRow(const std::vector<std::string>& fields, std::size_t from,
                             Direction direction) {
  std::vector<double> out;
  out.reserve(fields.size() - from);
  for (std::size_t k = from; k < fields.size(); ++k) {
    out.push_back(ToCost(ParseNumber(fields[k]), direction));
  }
  return out;
}

}  // namespace

const char* ToString(Direction direction) {
  return direction == Direction::kMax ? "max" : "min";
}

Direction ParseDirection(const std::string& name) {
  if (name == "min") return Direction::kMin;
  if (name == "max") return Direction::kMax;
  ThrowValidation("direction must be 'min' or 'max', got '" + name + "'");
}

CsvTable ReadCsv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    auto fields = SplitRecord(line, line_no);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      ThrowValidation("CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (in.bad()) ThrowIo("failed reading CSV input");
  if (!have_header) ThrowValidation("CSV input is empty");
  return table;
}

double ParseNumber(const std::string& field) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    ThrowValidation("not a number: '" + field + "'");
  }
  if (!std::isfinite(v)) ThrowValidation("non-finite value: '" + field + "'");
  return v;
}

HistoricalPool ReadPoolCsv(std::istream& in, Direction direction) {
  CsvTable table = ReadCsv(in);
  if (table.rows.empty()) ThrowValidation("historical pool has no rows");
  std::vector<std::vector<double>> vectors;
  vectors.reserve(table.rows.size());
  for (const auto& row : table.rows) vectors.push_back(ParseRow(row, 0, direction));
  return HistoricalPool(std::move(table.header), std::move(vectors));
}

Cohort ReadCohortCsv(std::istream& in, Direction direction,
                     const std::vector<std::string>& agent_ids) {
  const CsvTable table = ReadCsv(in);
  if (table.header.empty() || table.header[0] != "item_id") {
    ThrowValidation("cohort header must start with item_id");
  }
  const bool batches = table.header.size() > 1 && table.header[1] == "batch_id";
  const std::size_t first = batches ? 2 : 1;
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t k = first; k < table.header.size(); ++k) {
    if (!column.emplace(table.header[k], k).second) {
      ThrowValidation("duplicate cohort column '" + table.header[k] + "'");
    }
  }
  if (column.size() != agent_ids.size()) {
    ThrowValidation("cohort has " + std::to_string(column.size()) +
                    " agent columns, expected " + std::to_string(agent_ids.size()));
  }
  std::vector<std::size_t> order;
  order.reserve(agent_ids.size());
  for (const auto& id : agent_ids) {
    auto it = column.find(id);
    if (it == column.end()) ThrowValidation("cohort lacks agent column '" + id + "'");
    order.push_back(it->second);
  }
  Cohort cohort;
  for (const auto& row : table.rows) {
    cohort.item_ids.push_back(row[0]);
    if (batches) cohort.batch_ids.push_back(row[1]);
    std::vector<double> v;
    v.reserve(order.size());
    for (std::size_t k : order) v.push_back(ToCost(ParseNumber(row[k]), direction));
    cohort.vectors.push_back(std::move(v));
  }
  return cohort;
}

AgentPool ReadCapacitiesCsv(std::istream& in, const std::vector<std::string>& agent_ids) {
  const CsvTable table = ReadCsv(in);
  if (table.header.size() != 2 || table.header[0] != "agent" ||
      table.header[1] != "capacity") {
    ThrowValidation("capacities header must be 'agent,capacity'");
  }
  std::unordered_map<std::string, int> caps;
  for (const auto& row : table.rows) {
    const double v = ParseNumber(row[1]);
    if (v < 0 || v != std::floor(v) || v > 1e9) {
      ThrowValidation("capacity of '" + row[0] + "' must be a nonnegative integer");
    }
    if (!caps.emplace(row[0], static_cast<int>(v)).second) {
      ThrowValidation("agent '" + row[0] + "' listed twice in capacities");
    }
  }
  if (caps.size() != agent_ids.size()) {
    ThrowValidation("capacities list " + std::to_string(caps.size()) +
                    " agents, expected " + std::to_string(agent_ids.size()));
  }
  std::vector<int> ordered;
  for (const auto& id : agent_ids) {
    auto it = caps.find(id);
    if (it == caps.end()) ThrowValidation("no capacity for agent '" + id + "'");
    ordered.push_back(it->second);
  }
  return AgentPool(agent_ids, std::move(ordered));
}

CostMatrix ReadMatrixCsv(std::istream& in, Direction direction) {
  std::vector<std::vector<std::string>> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!IsBlank(line)) records.push_back(SplitRecord(line, line_no));
  }
  if (in.bad()) ThrowIo("failed reading matrix input");
  if (records.empty()) ThrowValidation("cost matrix is empty");
  std::vector<std::string> col_ids;
  std::size_t start = 0;
  for (const auto& f : records[0]) {
    if (!LooksNumeric(f)) {
      col_ids = records[0];
      start = 1;
      break;
    }
  }
  const bool row_labels = !col_ids.empty() && col_ids[0] == "item_id";
  if (row_labels) col_ids.erase(col_ids.begin());
  const std::size_t skip = row_labels ? 1 : 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> row_ids;
  for (std::size_t r = start; r < records.size(); ++r) {
    if (records[r].size() <= skip) ThrowValidation("matrix row without values");
    if (row_labels) row_ids.push_back(records[r][0]);
    rows.push_back(ParseRow(records[r], skip, direction));
    if (rows.back().size() != rows.front().size()) {
      ThrowValidation("matrix rows have different lengths");
    }
  }
  if (rows.empty()) ThrowValidation("cost matrix has no rows");
  if (!col_ids.empty() && col_ids.size() != rows.front().size()) {
    ThrowValidation("matrix header does not match row length");
  }
  CostMatrix matrix = CostMatrix::FromRows(rows);
  if (!col_ids.empty()) matrix.set_col_ids(std::move(col_ids));
  if (!row_ids.empty()) matrix.set_row_ids(std::move(row_ids));
  return matrix;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) ThrowIo("failed reading '" + path + "'");
  return os.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowIo("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) ThrowIo("failed writing '" + path + "'");
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace dynassign
