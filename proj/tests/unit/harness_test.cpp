#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "json.hpp"
#include "test_util.hpp"
#include "umjoin/core/error.hpp"
#include "umjoin/harness/csv.hpp"
#include "umjoin/harness/gen.hpp"
#include "umjoin/harness/sql.hpp"
#include "umjoin/plan/tsc.hpp"

namespace umjoin {
namespace {

using harness::parse_csv_table;
using plan::NodeKind;

const std::filesystem::path kFixtures{UMJOIN_FIXTURE_DIR};

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

TEST(Csv, RoundTripWithQuoting) {
  Table t;
  t.name = "t";
  t.schema.fields = {{"k", FieldType::kInt}, {"s", FieldType::kString}};
  t.rows = {{Value{std::int64_t{1}}, Value{std::string("plain")}},
            {Value{std::int64_t{-7}}, Value{std::string("a,b")}},
            {Value{std::int64_t{3}}, Value{std::string("say \"hi\"")}},
            {Value{std::int64_t{4}}, Value{std::string("")}},
            {Value{std::int64_t{5}}, Value{std::string("two\nlines")}}};
  const auto text = harness::format_csv_table(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "k:int,s:str");
  const auto back = parse_csv_table(text, "t");
  EXPECT_EQ(back.schema, t.schema);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(Csv, MalformedLinesAreTruncatedNotDropped) {
  const auto t = parse_csv_table("k:int,v:int\n1,2\nx,3\n4\n5,6,7\n", "t");
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].size(), 2u);
  EXPECT_EQ(t.rows[1].size(), 0u);
  EXPECT_EQ(t.rows[2].size(), 1u);
  EXPECT_EQ(t.rows[3].size(), 1u);
}

TEST(Csv, HeaderErrors) {
  EXPECT_THROW(parse_csv_table("", "t"), ConfigError);
  EXPECT_THROW(parse_csv_table("k\n1\n", "t"), ConfigError);
  EXPECT_THROW(parse_csv_table("k:float\n1\n", "t"), ConfigError);
  EXPECT_THROW(parse_csv_table("k:str\n\"open\n", "t"), ConfigError);
}

TEST(Gen, ZeroTuplesGivesHeaderOnly) {
  testing::TempDir dir;
  auto spec = harness::star_spec(2, 0, 10, 1);
  harness::write_dataset(spec, harness::generate(spec), dir.path());
  const auto text = testing::read_file(dir / "t0.csv");
  EXPECT_EQ(text, "k:int,id:int,pad:str\n");
}

TEST(Gen, FixedSeedIsByteIdentical) {
  testing::TempDir a, b;
  const auto spec = harness::tpcds4_spec(500, 40, 99);
  harness::write_dataset(spec, harness::generate(spec), a.path());
  harness::write_dataset(spec, harness::generate(spec), b.path());
  for (const auto& s : spec.streams) {
    EXPECT_EQ(testing::read_file(a / (s.name + ".csv")), testing::read_file(b / (s.name + ".csv"))) << s.name;
  }
  auto other = spec;
  other.seed = 100;
  testing::TempDir c;
  harness::write_dataset(other, harness::generate(other), c.path());
  EXPECT_NE(testing::read_file(a / "customer.csv"), testing::read_file(c / "customer.csv"));
}

TEST(Gen, ZipfIsSkewed) {
  harness::GenSpec spec;
  spec.seed = 5;
  harness::StreamSpec s;
  s.name = "z";
  s.tuple_count = 10000;
  s.key_domain = 100;
  s.distribution = harness::KeyDistribution::kZipf;
  s.zipf_s = 1.2;
  spec.streams.push_back(s);
  const auto tables = harness::generate(spec);
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& row : tables[0].rows) {
    const auto k = std::get<std::int64_t>(row[0]);
    ASSERT_GE(k, 0);
    ASSERT_LT(k, 100);
    ++counts[k];
  }
  std::size_t top = 0;
  for (const auto& [k, c] : counts) top = std::max(top, c);
  EXPECT_GT(top, 100u);
  EXPECT_GT(counts[0], counts[50]);
}

TEST(Gen, UniformCoversDomain) {
  const auto tables = harness::generate(harness::star_spec(1, 5000, 50, 3));
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& row : tables[0].rows) ++counts[std::get<std::int64_t>(row[0])];
  EXPECT_EQ(counts.size(), 50u);
  for (const auto& [k, c] : counts) EXPECT_LT(c, 200u) << k;
}

TEST(Gen, ManifestMatchesFiles) {
  testing::TempDir dir;
  const auto spec = harness::star_spec(3, 123, 7, 11);
  harness::write_dataset(spec, harness::generate(spec), dir.path());
  const auto manifest = nlohmann::json::parse(testing::read_file(dir / "manifest.json"));
  ASSERT_EQ(manifest["streams"].size(), 3u);
  for (const auto& s : manifest["streams"]) {
    const auto text = testing::read_file(dir / s["file"].get<std::string>());
    EXPECT_EQ(count_lines(text) - 1, s["tuple_count"].get<std::size_t>());
  }
  EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), 11u);
}

TEST(Gen, InvalidSpecs) {
  auto spec = harness::star_spec(1, 10, 0, 1);
  EXPECT_THROW(harness::generate(spec), ConfigError);
  spec = harness::star_spec(1, 10, 5, 1);
  spec.streams[0].distribution = harness::KeyDistribution::kZipf;
  spec.streams[0].zipf_s = 0;
  EXPECT_THROW(harness::generate(spec), ConfigError);
}

TEST(Sql, TwoTableQuery) {
  const auto p = harness::parse_query("SELECT * FROM t0 a, t1 b WHERE a.k = b.k");
  p.validate();
  const auto* root = p.root();
  ASSERT_TRUE(root->is(NodeKind::kJoin));
  ASSERT_EQ(root->inputs.size(), 2u);
  for (const auto* in : root->inputs) {
    ASSERT_TRUE(in->is(NodeKind::kHash));
    EXPECT_TRUE(in->inputs.at(0)->is(NodeKind::kScan));
  }
  ASSERT_EQ(root->join_keys.size(), 1u);
  EXPECT_EQ(root->join_keys[0].left, (plan::ColumnRef{0, "a.k"}));
  EXPECT_EQ(root->join_keys[0].right, (plan::ColumnRef{1, "b.k"}));
  EXPECT_EQ(p.arena().size(), 5u);
}

TEST(Sql, PredicateOrientationFollowsFromOrder) {
  const auto p = harness::parse_query("select * from t0 as a, t1 as b where b.k = a.k");
  EXPECT_EQ(p.root()->join_keys[0].left, (plan::ColumnRef{0, "a.k"}));
  EXPECT_EQ(p.root()->join_keys[0].right, (plan::ColumnRef{1, "b.k"}));
}

TEST(Sql, Tpcds4MatchesGoldenPlan) {
  const auto sql = harness::read_text_file(kFixtures / "sql" / "tpcds4.sql");
  const auto golden = plan::parse_plan(harness::read_text_file(kFixtures / "sql" / "tpcds4_golden.json"));
  const auto parsed = harness::parse_query(sql);
  EXPECT_TRUE(plan::isomorphic(parsed, golden)) << plan::serialize_plan(parsed);

  const auto converted = plan::two_step_convert(parsed);
  EXPECT_EQ(converted.multijoins, 1u);
  const auto* root = converted.plan.root();
  ASSERT_TRUE(root->is(NodeKind::kMultiJoin));
  std::vector<std::string> inputs;
  for (const auto* in : root->inputs) inputs.push_back(in->id);
  EXPECT_EQ(inputs, (std::vector<std::string>{"hash_6", "hash_4", "hash_1", "hash_2"}));
  EXPECT_EQ(root->join_keys.size(), 3u);
}

std::size_t sql_error_position(const std::string& sql) {
  try {
    harness::parse_query(sql);
  } catch (const SqlError& e) {
    return e.position();
  }
  ADD_FAILURE() << "accepted: " << sql;
  return 0;
}

TEST(Sql, RejectsNonEquiPredicateWithPosition) {
  const std::string sql = "SELECT * FROM t0 a, t1 b WHERE a.x < b.y";
  EXPECT_EQ(sql_error_position(sql), sql.find('<'));
}

TEST(Sql, RejectsUnsupportedShapes) {
  const std::string literal = "SELECT * FROM t0 a, t1 b WHERE a.k = 3";
  EXPECT_EQ(sql_error_position(literal), literal.find('3'));
  const std::string unqualified = "SELECT * FROM t0 a, t1 b WHERE k = b.k";
  EXPECT_EQ(sql_error_position(unqualified), unqualified.find("k ="));
  const std::string unknown = "SELECT * FROM t0 a, t1 b WHERE a.k = c.k";
  EXPECT_EQ(sql_error_position(unknown), unknown.find("c.k"));
  const std::string filter = "SELECT * FROM t0 a, t1 b WHERE a.k = a.v AND a.k = b.k";
  EXPECT_EQ(sql_error_position(filter), filter.find("a.k"));
  const std::string unconnected = "SELECT * FROM t0 a, t1 b, t2 c WHERE a.k = b.k";
  EXPECT_EQ(sql_error_position(unconnected), unconnected.find("t2"));
  const std::string dup = "SELECT * FROM t0 a, t1 a WHERE a.k = a.k";
  EXPECT_EQ(sql_error_position(dup), dup.find("t1"));
  sql_error_position("SELECT * FROM t0 a, t1 b WHERE a.k = b.k OR a.v = b.v");
  sql_error_position("SELECT * FROM t0 a JOIN t1 b ON a.k = b.k");
  sql_error_position("SELECT a.k FROM t0 a, t1 b WHERE a.k = b.k");
  sql_error_position("");
}

}  // namespace
}  // namespace umjoin
