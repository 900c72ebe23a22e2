#include <gtest/gtest.h>

#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>

#include "dynassign/error.hpp"
#include "dynassign/io.hpp"

namespace dynassign {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

TEST(Csv, QuotedFieldsAndBlankLines) {
  std::istringstream in("a, \"b,c\" ,d\n\n 1 ,\"x\"\"y\",3\n");
  const CsvTable t = ReadCsv(in);
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.header[1], "b,c");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "1");
  EXPECT_EQ(t.rows[0][1], "x\"y");
}

TEST(Csv, RaggedRowIsRejected) {
  std::istringstream in("a,b\n1\n");
  EXPECT_EQ(CodeOf([&] { ReadCsv(in); }), ErrorCode::kValidation);
}

TEST(Csv, NumbersMustBeFinite) {
  EXPECT_EQ(ParseNumber("0.25"), 0.25);
  EXPECT_EQ(ParseNumber("-3e-2"), -0.03);
  EXPECT_EQ(CodeOf([] { ParseNumber("abc"); }), ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([] { ParseNumber("inf"); }), ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([] { ParseNumber(""); }), ErrorCode::kValidation);
}

TEST(Pool, MaxDirectionComplementsScores) {
  std::istringstream in("x,y\n0.25,0.5\n1,0\n");
  const HistoricalPool pool = ReadPoolCsv(in, Direction::kMax);
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool.agent_ids()[1], "y");
  EXPECT_EQ(pool.vector(0)[0], 0.75);
  EXPECT_EQ(pool.vector(0)[1], 0.5);
  EXPECT_EQ(pool.vector(1)[0], 0.0);
}

TEST(Pool, EmptyPoolIsRejected) {
  std::istringstream in("x,y\n");
  EXPECT_EQ(CodeOf([&] { ReadPoolCsv(in, Direction::kMin); }), ErrorCode::kValidation);
}

TEST(Cohort, ColumnsFollowAgentOrderAndBatchIdsAreKept) {
  std::istringstream in("item_id,batch_id,y,x\ni1,b1,0.5,0.25\ni2,b1,0.125,1\n");
  const Cohort c = ReadCohortCsv(in, Direction::kMin, {"x", "y"});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_TRUE(c.has_batches());
  EXPECT_EQ(c.item_ids[1], "i2");
  EXPECT_EQ(c.batch_ids[0], "b1");
  EXPECT_EQ(c.vectors[0], (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(c.vectors[1], (std::vector<double>{1.0, 0.125}));
}

TEST(Cohort, MissingAgentColumnIsRejected) {
  std::istringstream in("item_id,x,z\ni1,0,0\n");
  EXPECT_EQ(CodeOf([&] { ReadCohortCsv(in, Direction::kMin, {"x", "y"}); }),
            ErrorCode::kValidation);
}

TEST(Cohort, HeaderMustStartWithItemId) {
  std::istringstream in("id,x\ni1,0\n");
  EXPECT_EQ(CodeOf([&] { ReadCohortCsv(in, Direction::kMin, {"x"}); }),
            ErrorCode::kValidation);
}

TEST(Capacities, ReorderedToAgentIds) {
  std::istringstream in("agent,capacity\ny,3\nx,1\n");
  const AgentPool p = ReadCapacitiesCsv(in, {"x", "y"});
  EXPECT_EQ(p.capacities, (std::vector<int>{1, 3}));
}

TEST(Capacities, RejectsFractionsDuplicatesAndGaps) {
  std::istringstream frac("agent,capacity\nx,1.5\n");
  EXPECT_EQ(CodeOf([&] { ReadCapacitiesCsv(frac, {"x"}); }), ErrorCode::kValidation);
  std::istringstream dup("agent,capacity\nx,1\nx,2\n");
  EXPECT_EQ(CodeOf([&] { ReadCapacitiesCsv(dup, {"x"}); }), ErrorCode::kValidation);
  std::istringstream gap("agent,capacity\nx,1\n");
  EXPECT_EQ(CodeOf([&] { ReadCapacitiesCsv(gap, {"x", "y"}); }), ErrorCode::kValidation);
}

TEST(Matrix, PlainGrid) {
  std::istringstream in("1,2\n2,4\n");
  const CostMatrix m = ReadMatrixCsv(in, Direction::kMin);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m(1, 1), 4.0);
}

TEST(Matrix, HeaderAndRowLabels) {
  std::istringstream in("item_id,u,v\nfirst,0.25,0.5\nsecond,1,0\n");
  const CostMatrix m = ReadMatrixCsv(in, Direction::kMax);
  EXPECT_EQ(m.col_ids()[1], "v");
  EXPECT_EQ(m.row_ids()[0], "first");
  EXPECT_EQ(m(0, 0), 0.75);
  EXPECT_EQ(m(1, 1), 1.0);
}

TEST(Files, MissingFileIsAnIoError) {
  EXPECT_EQ(CodeOf([] { ReadFile("/nonexistent/dir/file.csv"); }), ErrorCode::kIo);
}

TEST(Digest, KnownFnv1aVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(HexDigest(0xabcULL), "0000000000000abc");
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 123456789.123456789}) {
    EXPECT_EQ(std::strtod(FormatDouble(v).c_str(), nullptr), v);
  }
}

TEST(Direction, ParsesBothNames) {
  EXPECT_EQ(ParseDirection("max"), Direction::kMax);
  EXPECT_EQ(ParseDirection("min"), Direction::kMin);
  EXPECT_EQ(CodeOf([] { ParseDirection("up"); }), ErrorCode::kValidation);
  EXPECT_EQ(ToCost(0.75, Direction::kMax), 0.25);
  EXPECT_EQ(ToCost(0.75, Direction::kMin), 0.75);
}

}  // namespace
}  // namespace dynassign
