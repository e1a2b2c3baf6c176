#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "json.hpp"
#include "plan_builder.hpp"
#include "umjoin/core/error.hpp"
#include "umjoin/engine/pipeline.hpp"
#include "umjoin/oracle/interpreter.hpp"
#include "umjoin/oracle/nested_loop.hpp"
#include "umjoin/plan/tsc.hpp"

namespace umjoin {
namespace {

using engine::EngineConfig;
using engine::EngineMode;
using testing::PlanBuilder;

Catalog star_catalog(std::size_t streams, std::size_t rows, int keys, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Catalog c;
  for (std::size_t s = 0; s < streams; ++s) {
    Table t{"t" + std::to_string(s), Schema{{{"k", FieldType::kInt}, {"v", FieldType::kInt}}}, {}};
    for (std::size_t i = 0; i < rows; ++i) {
      t.rows.push_back({Value{static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(keys))},
                        Value{static_cast<std::int64_t>(i)}});
    }
    c[t.name] = std::move(t);
  }
  return c;
}

// Left-deep binary tree with hashes: ((t0 ⋈ t1) ⋈ t2) ...
plan::Plan star_bjt_plan(std::size_t streams) {
  PlanBuilder b;
  for (std::size_t s = 0; s < streams; ++s) {
    const auto n = std::to_string(s);
    b.scan("scan" + n, "t" + n, "s" + n).hash("hash" + n, "scan" + n);
  }
  std::string left = "hash0";
  for (std::size_t s = 1; s < streams; ++s) {
    const auto n = std::to_string(s);
    b.join("join" + n, left, "hash" + n, "s0.k", "s" + n + ".k");
    if (s + 1 < streams) {
      b.hash("hj" + n, "join" + n);
      left = "hj" + n;
    }
  }
  return b.build("join" + std::to_string(streams - 1));
}

std::vector<std::size_t> counts_for(const plan::Plan& p, const Catalog& c) {
  std::vector<std::size_t> out;
  for (const auto& s : engine::plan_sources(p)) out.push_back(c.at(s.table).rows.size());
  return out;
}

engine::MetricsReport run(const plan::Plan& p, const Catalog& c, EngineConfig cfg, std::uint64_t seed = 11) {
  const auto schedule = engine::random_schedule(counts_for(p, c), seed);
  return engine::run_pipeline(p, c, schedule, cfg);
}

std::uint64_t oracle_count(const Catalog& c, std::size_t streams) {
  oracle::StreamContents contents(streams);
  std::uint32_t id = 0;
  for (std::size_t s = 0; s < streams; ++s) {
    for (const auto& row : c.at("t" + std::to_string(s)).rows) contents[s].push_back({encode_key(row[0]), id++});
  }
  return oracle::batch_multi_join(contents).size();
}

TEST(Pipeline, EmptySourcesGiveZeroOutputs) {
  const auto c = star_catalog(3, 0, 5, 1);
  const auto p = plan::two_step_convert(star_bjt_plan(3)).plan;
  const auto r = engine::run_pipeline(p, c, {}, EngineConfig{});
  EXPECT_EQ(r.total_outputs, 0u);
  EXPECT_EQ(r.events, 0u);
  EXPECT_FALSE(r.aborted);
  ASSERT_EQ(r.samples.size(), 1u);
}

TEST(Pipeline, FourWayStarMatchesOracleCount) {
  const auto c = star_catalog(4, 1000, 300, 2);
  const auto p = plan::two_step_convert(star_bjt_plan(4)).plan;
  EngineConfig cfg;
  cfg.backend.memtable_capacity_entries = 128;
  const auto r = run(p, c, cfg);
  EXPECT_EQ(r.total_outputs, oracle_count(c, 4));
  EXPECT_EQ(r.intermediate_rows, 0u);
  EXPECT_EQ(r.per_stream.size(), 4u);
  EXPECT_GT(r.per_stream.at("multijoin-1[0]").flush_count, 0u);
}

TEST(Pipeline, ModesAgreeWithInterpreterOnThreeStreams) {
  const auto c = star_catalog(3, 60, 6, 3);
  const auto bjt_plan = star_bjt_plan(3);
  const auto mj_plan = plan::two_step_convert(bjt_plan).plan;
  const auto expected = render_canonical(oracle::interpret_plan(bjt_plan, c));

  EngineConfig cfg;
  cfg.collect_output = true;
  cfg.backend.memtable_capacity_entries = 8;
  cfg.mode = EngineMode::kUmjoin;
  const auto um = run(mj_plan, c, cfg);
  cfg.mode = EngineMode::kBjt;
  const auto bj = run(bjt_plan, c, cfg);
  const auto bj_expanded = run(mj_plan, c, cfg);
  cfg.mode = EngineMode::kCappedHash;
  cfg.cap_bytes = 1u << 30;
  const auto ch = run(mj_plan, c, cfg);

  EXPECT_EQ(render_canonical(*um.output), expected);
  EXPECT_EQ(render_canonical(*bj.output), expected);
  EXPECT_EQ(render_canonical(*bj_expanded.output), expected);
  EXPECT_EQ(render_canonical(*ch.output), expected);
  EXPECT_FALSE(ch.aborted);
}

TEST(Pipeline, IntermediateRowsOnlyInBjtMode) {
  const auto c = star_catalog(4, 200, 20, 4);
  const auto bjt_plan = star_bjt_plan(4);
  const auto mj_plan = plan::two_step_convert(bjt_plan).plan;
  EngineConfig cfg;
  const auto um = run(mj_plan, c, cfg);
  cfg.mode = EngineMode::kBjt;
  const auto bj = run(bjt_plan, c, cfg);
  EXPECT_EQ(um.intermediate_rows, 0u);
  EXPECT_GT(bj.intermediate_rows, 0u);
  EXPECT_EQ(um.total_outputs, bj.total_outputs);

  // Child emissions counted independently: the join1 and join2 outputs.
  const auto j1 = render_canonical(oracle::interpret_plan(
      PlanBuilder().scan("scan0", "t0", "s0").scan("scan1", "t1", "s1").join("j", "scan0", "scan1", "s0.k", "s1.k").build("j"),
      c));
  const auto j1_rows = std::count(j1.begin(), j1.end(), '\n') - 1;
  plan::Plan sub = star_bjt_plan(3);
  const auto j2_rows = oracle::interpret_plan(sub, c).rows.size();
  EXPECT_EQ(bj.intermediate_rows, static_cast<std::uint64_t>(j1_rows) + j2_rows);
}

TEST(Pipeline, BjtOrderDoesNotChangeOutput) {
  const auto c = star_catalog(3, 40, 5, 5);
  const auto p = plan::two_step_convert(star_bjt_plan(3)).plan;
  EngineConfig cfg;
  cfg.mode = EngineMode::kBjt;
  cfg.collect_output = true;
  std::string first;
  std::vector<std::size_t> order{0, 1, 2};
  do {
    cfg.bjt_order = order;
    const auto text = render_canonical(*run(p, c, cfg).output);
    if (first.empty()) first = text;
    EXPECT_EQ(text, first);
  } while (std::next_permutation(order.begin(), order.end()));
  cfg.bjt_order = {0, 0, 1};
  EXPECT_THROW(run(p, c, cfg), ConfigError);
}

TEST(Pipeline, CappedHashAbortsUnderHalfTheState) {
  const auto c = star_catalog(3, 300, 30, 6);
  const auto p = plan::two_step_convert(star_bjt_plan(3)).plan;
  EngineConfig cfg;
  cfg.mode = EngineMode::kCappedHash;
  cfg.cap_bytes = 1ull << 40;
  const auto full = run(p, c, cfg);
  EXPECT_FALSE(full.aborted);
  EXPECT_EQ(full.total_outputs, oracle_count(c, 3));

  cfg.cap_bytes = full.state_bytes / 2;
  const auto half = run(p, c, cfg);
  EXPECT_TRUE(half.aborted);
  EXPECT_LT(half.total_outputs, full.total_outputs);
  EXPECT_FALSE(half.abort_reason.empty());

  cfg.cap_bytes = 1;
  const auto tiny = run(p, c, cfg);
  EXPECT_TRUE(tiny.aborted);
  EXPECT_EQ(tiny.total_outputs, 0u);
  EXPECT_EQ(tiny.events, 1u);
}

TEST(Pipeline, SameSeedSameReport) {
  const auto c = star_catalog(3, 150, 10, 7);
  const auto p = plan::two_step_convert(star_bjt_plan(3)).plan;
  EngineConfig cfg;
  cfg.backend.memtable_capacity_entries = 16;
  cfg.sample_every = 50;
  const auto a = run(p, c, cfg);
  const auto b = run(p, c, cfg);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].events, b.samples[i].events);
    EXPECT_EQ(a.samples[i].outputs, b.samples[i].outputs);
    EXPECT_EQ(a.samples[i].per_stream, b.samples[i].per_stream);
  }
  EXPECT_EQ(a.per_stream, b.per_stream);
  EXPECT_EQ(a.total_outputs, b.total_outputs);
  for (std::size_t i = 1; i < a.samples.size(); ++i) EXPECT_GE(a.samples[i].outputs, a.samples[i - 1].outputs);
}

TEST(Pipeline, PlanModeMismatchIsConfigError) {
  const auto c = star_catalog(3, 10, 3, 8);
  EngineConfig cfg;
  EXPECT_THROW(run(star_bjt_plan(3), c, cfg), ConfigError);

  // Chain keys: a multijoin whose inputs do not share one key cannot run as UMJoin.
  PlanBuilder b;
  b.scan("a", "t0", "a").scan("b", "t1", "b").scan("c", "t2", "c");
  b.join("j2", "a", "b", "a.k", "b.k").join("j1", "j2", "c", "b.v", "c.k");
  const auto converted = plan::two_step_convert(b.build("j1")).plan;
  EXPECT_THROW(run(converted, c, cfg), ConfigError);
  cfg.mode = EngineMode::kCappedHash;
  EXPECT_THROW(run(plan::two_step_convert(star_bjt_plan(3)).plan, c, cfg), ConfigError);  // cap_bytes unset
}

TEST(Pipeline, ChainJoinsRunInBjtMode) {
  const auto c = star_catalog(3, 30, 4, 9);
  PlanBuilder b;
  b.scan("a", "t0", "a").scan("b", "t1", "b").scan("c", "t2", "c");
  b.join("j2", "a", "b", "a.k", "b.k").join("j1", "j2", "c", "b.v", "c.k");
  const auto p = b.build("j1");
  EngineConfig cfg;
  cfg.mode = EngineMode::kBjt;
  cfg.collect_output = true;
  EXPECT_EQ(render_canonical(*run(p, c, cfg).output), render_canonical(oracle::interpret_plan(p, c)));
}

TEST(Pipeline, ProjectionsAndSharedScans) {
  const auto c = star_catalog(3, 25, 4, 10);
  PlanBuilder b;
  b.scan("a", "t0", "a").scan("b", "t1", "b").scan("c", "t2", "c");
  b.join("low", "a", "b", "a.k", "b.k").project("p", "low", {"a.k", "b.v"}).hash("hp", "p");
  b.join("top", "hp", "c", "a.k", "c.k").project("out", "top", {"b.v", "c.v"});
  const auto original = b.build("out");
  const auto expected = render_canonical(oracle::interpret_plan(original, c));
  EngineConfig cfg;
  cfg.collect_output = true;
  for (bool with_project : {false, true}) {
    const auto converted = plan::two_step_convert(original, plan::PatternConfig{with_project}).plan;
    cfg.mode = EngineMode::kUmjoin;
    const auto um = run(converted, c, cfg);
    EXPECT_EQ(render_canonical(*um.output), expected) << with_project;
    EXPECT_EQ(um.intermediate_rows > 0, !with_project);
    cfg.mode = EngineMode::kBjt;
    EXPECT_EQ(render_canonical(*run(converted, c, cfg).output), expected) << with_project;
  }
}

TEST(Pipeline, MalformedRowsAreCountedAndSkipped) {
  auto c = star_catalog(2, 10, 2, 11);
  c["t0"].rows[3] = Row{Value{1}};
  c["t1"].rows[4] = Row{Value{std::string("x")}, Value{1}};
  const auto p = plan::two_step_convert(star_bjt_plan(2)).plan;
  EngineConfig cfg;
  cfg.collect_output = true;
  const auto r = run(p, c, cfg);
  EXPECT_EQ(r.rejected_events, 2u);
  EXPECT_EQ(r.events, 20u);
  EXPECT_EQ(render_canonical(*r.output), render_canonical(oracle::interpret_plan(p, c)));
}

TEST(Pipeline, MetricsJsonLines) {
  const auto c = star_catalog(2, 30, 3, 12);
  const auto p = plan::two_step_convert(star_bjt_plan(2)).plan;
  EngineConfig cfg;
  cfg.sample_every = 20;
  std::ostringstream out;
  engine::write_metrics_jsonl(run(p, c, cfg), out);
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0]["events"], 20);
  EXPECT_TRUE(lines[0]["per_stream"].contains("multijoin-1[0]"));
  EXPECT_TRUE(lines[0]["per_stream"]["multijoin-1[0]"].contains("blocks_read"));
  EXPECT_EQ(lines.back()["final"], true);
  EXPECT_EQ(lines.back()["outputs"], lines[2]["outputs"]);
  EXPECT_EQ(lines.back()["aborted"], false);
}

TEST(Schedule, RandomIsDeterministicPermutation) {
  const std::vector<std::size_t> counts{3, 0, 5};
  const auto a = engine::random_schedule(counts, 42);
  EXPECT_EQ(a, engine::random_schedule(counts, 42));
  EXPECT_NE(a, engine::random_schedule(counts, 43));
  EXPECT_NO_THROW(engine::check_schedule(a, counts));
  EXPECT_EQ(engine::round_robin_schedule(counts), (std::vector<std::size_t>{0, 2, 0, 2, 0, 2, 2, 2}));
}

TEST(Schedule, ParseAndCheck) {
  EXPECT_EQ(engine::parse_schedule("0\n1\r\n\n 2 \n"), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(engine::parse_schedule("0\nx\n"), ConfigError);
  const std::vector<std::size_t> counts{1, 1};
  EXPECT_THROW(engine::check_schedule(std::vector<std::size_t>{0, 0}, counts), ConfigError);
  EXPECT_THROW(engine::check_schedule(std::vector<std::size_t>{0, 2}, counts), ConfigError);
}

TEST(Schedule, SourcesAreOrderedByAlias) {
  const auto p = PlanBuilder().scan("x", "T1", "zeta").scan("y", "T2", "alpha").join("j", "x", "y", "zeta.k", "alpha.k").build("j");
  const auto s = engine::plan_sources(p);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].alias, "alpha");
  EXPECT_EQ(s[1].table, "T1");
  EXPECT_EQ(engine::parse_mode("capped_hash"), EngineMode::kCappedHash);
  EXPECT_EQ(engine::parse_mode("nope"), std::nullopt);
}

}  // namespace
}  // namespace umjoin
