#include <gtest/gtest.h>

#include <random>

#include "plan_builder.hpp"
#include "umjoin/core/error.hpp"
#include "umjoin/oracle/interpreter.hpp"
#include "umjoin/oracle/nested_loop.hpp"
#include "umjoin/plan/tsc.hpp"

namespace umjoin {
namespace {

using oracle::OracleTuple;
using oracle::ResultMultiset;
using oracle::StreamContents;
using Ids = std::vector<std::uint32_t>;

OracleTuple tup(std::int64_t key, std::uint32_t id) { return {encode_key(Value{key}), id}; }

StreamContents random_contents(std::mt19937_64& rng, std::size_t streams, std::size_t max_tuples, int keys) {
  StreamContents c(streams);
  std::uint32_t next = 0;
  for (auto& s : c) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, max_tuples)(rng);
    for (std::size_t i = 0; i < n; ++i) s.push_back(tup(std::uniform_int_distribution<int>(0, keys - 1)(rng), next++));
  }
  return c;
}

TEST(ResultMultiset, OrderInsensitiveMultiplicitySensitive) {
  ResultMultiset a(2), b(2);
  a.add(Ids{1, 2});
  a.add(Ids{3, 4});
  a.add(Ids{1, 2});
  b.add(Ids{1, 2});
  b.add(Ids{1, 2});
  b.add(Ids{3, 4});
  EXPECT_EQ(a, b);
  b.add(Ids{3, 4});
  EXPECT_NE(a, b);
  ResultMultiset c(2);
  c.add(Ids{2, 1});
  c.add(Ids{3, 4});
  c.add(Ids{1, 2});
  EXPECT_NE(a, c);
}

TEST(ResultMultiset, ProductMatchesExplicitRows) {
  const std::vector<Ids> lists{{1, 2}, {7}, {4, 5, 6}};
  ResultMultiset p(3), e(3);
  p.add_product(lists);
  for (auto x : lists[0])
    for (auto y : lists[1])
      for (auto z : lists[2]) e.add(Ids{x, y, z});
  EXPECT_EQ(p.size(), 6u);
  EXPECT_EQ(p, e);
  ResultMultiset empty(3);
  empty.add_product(std::vector<Ids>{{1}, {}, {2}});
  EXPECT_TRUE(empty.empty());
}

TEST(ResultMultiset, WidensWhenIdsOutgrowPacking) {
  ResultMultiset a(4), b(4);
  a.add(Ids{1, 2, 3, 4});
  a.add(Ids{70000, 0, 0, 1});
  a.add_product(std::vector<Ids>{{1}, {2}, {3}, {100000, 4}});
  b.add(Ids{1, 2, 3, 4});
  b.add(Ids{1, 2, 3, 4});
  b.add(Ids{1, 2, 3, 100000});
  EXPECT_NE(a, b);
  b.add(Ids{70000, 0, 0, 1});
  EXPECT_EQ(a.size(), 4u);
  ResultMultiset c(4);
  c.add(Ids{1, 2, 3, 4});
  c.add(Ids{1, 2, 3, 4});
  c.add(Ids{1, 2, 3, 100000});
  c.add(Ids{70000, 0, 0, 1});
  EXPECT_EQ(a, c);
  EXPECT_EQ(a.rows().front(), (Ids{1, 2, 3, 4}));
}

TEST(ResultMultiset, LargeSortIsCanonical) {
  std::mt19937_64 rng(5);
  ResultMultiset a(3), b(3);
  std::vector<Ids> rows;
  for (int i = 0; i < 20000; ++i) rows.push_back({static_cast<std::uint32_t>(rng() % 50), static_cast<std::uint32_t>(rng() % 50),
                                                  static_cast<std::uint32_t>(rng() % 50)});
  for (const auto& r : rows) a.add(r);
  std::shuffle(rows.begin(), rows.end(), rng);
  for (const auto& r : rows) b.add(r);
  EXPECT_EQ(a, b);
  const auto sorted = a.rows();
  EXPECT_TRUE(std::is_sorted(sorted.begin(), sorted.end()));
}

TEST(ResultMultiset, SubtractReportsMissing) {
  ResultMultiset a(2), b(2);
  a.add(Ids{1, 1});
  a.add(Ids{1, 1});
  a.add(Ids{2, 2});
  b.add(Ids{1, 1});
  b.add(Ids{3, 3});
  std::size_t missing = 0;
  const auto d = subtract(a, b, &missing);
  EXPECT_EQ(missing, 1u);
  ResultMultiset expected(2);
  expected.add(Ids{1, 1});
  expected.add(Ids{2, 2});
  EXPECT_EQ(d, expected);
}

TEST(BatchMultiJoin, EmptyStreamAnnihilates) {
  StreamContents c{{tup(1, 0)}, {}, {tup(1, 1)}};
  EXPECT_TRUE(oracle::batch_multi_join(c).empty());
}

TEST(BatchMultiJoin, OneByTwoCross) {
  StreamContents c{{tup(7, 0)}, {tup(7, 1), tup(7, 2), tup(8, 3)}};
  ResultMultiset expected(2);
  expected.add(Ids{0, 1});
  expected.add(Ids{0, 2});
  EXPECT_EQ(oracle::batch_multi_join(c), expected);
}

TEST(BatchMultiJoin, AgreesWithReferenceOnRandomInstances) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const auto c = random_contents(rng, n, 12, 4);
    EXPECT_EQ(oracle::batch_multi_join(c), oracle::reference_multi_join(c)) << "trial " << trial;
  }
}

TEST(BatchMultiJoin, ThreeStreamsHundredTuplesTenKeys) {
  std::mt19937_64 rng(77);
  StreamContents c(3);
  std::uint32_t id = 0;
  for (auto& s : c)
    for (int i = 0; i < 100; ++i) s.push_back(tup(static_cast<std::int64_t>(rng() % 10), id++));
  const auto batch = oracle::batch_multi_join(c);
  EXPECT_EQ(batch, oracle::reference_multi_join(c));
  EXPECT_GT(batch.size(), 0u);
}

TEST(ExpectedIncrement, EmptyIncrementIsEmpty) {
  StreamContents c{{tup(1, 0)}, {tup(1, 1)}};
  EXPECT_TRUE(oracle::expected_increment(c, 0, {}).empty());
}

TEST(ExpectedIncrement, SingleMatch) {
  StreamContents c{{}, {tup(3, 9), tup(4, 8)}};
  const std::vector<OracleTuple> inc{tup(3, 1)};
  const auto r = oracle::expected_increment(c, 0, inc);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.row(0), (Ids{1, 9}));
}

TEST(ExpectedIncrement, SumOverScheduleEqualsBatchDifference) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const auto initial = random_contents(rng, n, 5, 3);
    const auto added = random_contents(rng, n, 15, 3);
    std::vector<std::pair<std::size_t, OracleTuple>> schedule;
    for (std::size_t s = 0; s < n; ++s)
      for (const auto& t : added[s]) schedule.emplace_back(s, t);
    std::shuffle(schedule.begin(), schedule.end(), rng);

    StreamContents state = initial;
    ResultMultiset sum(n);
    for (const auto& [s, t] : schedule) {
      sum.append(oracle::expected_increment(state, s, std::span(&t, 1)));
      state[s].push_back(t);
    }
    std::size_t missing = 0;
    const auto diff = subtract(oracle::batch_multi_join(state), oracle::batch_multi_join(initial), &missing);
    EXPECT_EQ(missing, 0u);
    EXPECT_EQ(sum, diff) << "trial " << trial;
  }
}

Catalog small_catalog() {
  Catalog c;
  c["A"] = Table{"A", Schema{{{"k", FieldType::kInt}, {"v", FieldType::kString}}},
                 {{Value{1}, Value{std::string("x")}}, {Value{1}, Value{std::string("y")}}, {Value{2}, Value{std::string("z")}}}};
  c["B"] = Table{"B", Schema{{{"k", FieldType::kInt}, {"w", FieldType::kInt}}},
                 {{Value{1}, Value{10}}, {Value{2}, Value{20}}, {Value{3}, Value{30}}}};
  c["C"] = Table{"C", Schema{{{"k", FieldType::kInt}}}, {{Value{1}}, {Value{1}}, {Value{2}}}};
  return c;
}

TEST(InterpretPlan, ScanReturnsTable) {
  const auto r = oracle::interpret_plan(testing::PlanBuilder().scan("s", "A", "a").build("s"), small_catalog());
  EXPECT_EQ(r.rows, small_catalog()["A"].rows);
  EXPECT_EQ(r.columns[1].name, "a.v");
}

TEST(InterpretPlan, ProjectOverJoinKeepsMultiplicity) {
  testing::PlanBuilder b;
  b.scan("sa", "A", "a").scan("sb", "B", "b").join("j", "sa", "sb", "a.k", "b.k").project("p", "j", {"b.w"});
  const auto r = oracle::interpret_plan(b.build("p"), small_catalog());
  // Hand-computed: k=1 matches twice, k=2 once.
  EXPECT_EQ(canonical_lines(r), (std::vector<std::string>{"10", "10", "20"}));
}

TEST(InterpretPlan, WorkedExampleSurvivesConversion) {
  testing::PlanBuilder b;
  b.scan("scanA", "A", "a").scan("scanB", "B", "b").scan("scanC", "C", "c");
  b.hash("hashA", "scanA").hash("hashB", "scanB").hash("hashC", "scanC");
  b.join("join2", "hashA", "hashB", "a.k", "b.k").hash("hashJ2", "join2");
  b.join("join1", "hashJ2", "hashC", "b.k", "c.k");
  const auto original = b.build("join1");
  const auto converted = plan::two_step_convert(original).plan;
  const auto r1 = oracle::interpret_plan(original, small_catalog());
  const auto r2 = oracle::interpret_plan(converted, small_catalog());
  EXPECT_EQ(r1.rows.size(), 5u);
  EXPECT_EQ(render_canonical(r1), render_canonical(r2));
}

TEST(InterpretPlan, UnknownColumnAndTable) {
  testing::PlanBuilder b;
  b.scan("sa", "A", "a").project("p", "sa", {"a.nope"});
  EXPECT_THROW(oracle::interpret_plan(b.build("p"), small_catalog()), PlanError);
  EXPECT_THROW(oracle::interpret_plan(testing::PlanBuilder().scan("s", "Z").build("s"), small_catalog()), PlanError);
}

TEST(Relation, CanonicalFormIgnoresColumnOrder) {
  Relation r1{{{"a.k", FieldType::kInt}, {"b.s", FieldType::kString}}, {{Value{1}, Value{std::string("q\"")}}}};
  Relation r2{{{"b.s", FieldType::kString}, {"a.k", FieldType::kInt}}, {{Value{std::string("q\"")}, Value{1}}}};
  EXPECT_EQ(render_canonical(r1), render_canonical(r2));
  EXPECT_EQ(render_canonical(r1), "# a.k,b.s\n1,\"q\\\"\"\n");
  Relation d1{{{"a.k", FieldType::kInt}, {"a.k", FieldType::kInt}}, {{Value{2}, Value{1}}}};
  Relation d2{{{"a.k", FieldType::kInt}, {"a.k", FieldType::kInt}}, {{Value{1}, Value{2}}}};
  EXPECT_EQ(canonical_lines(d1), canonical_lines(d2));
}

}  // namespace
}  // namespace umjoin
