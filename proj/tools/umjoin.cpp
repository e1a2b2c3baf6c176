#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "umjoin/core/error.hpp"
#include "umjoin/engine/pipeline.hpp"
#include "umjoin/harness/csv.hpp"
#include "umjoin/harness/gen.hpp"
#include "umjoin/harness/sql.hpp"
#include "umjoin/oracle/interpreter.hpp"
#include "umjoin/plan/tsc.hpp"

namespace fs = std::filesystem;
using namespace umjoin;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitAborted = 4;

struct Globals {
  std::uint64_t seed = 42;
  std::string log_level = "info";
};

struct GenOptions {
  fs::path out;
  std::string preset = "star";
  std::size_t streams = 3;
  std::size_t rows = 1000;
  std::uint64_t keys = 50;
  std::string dist = "uniform";
  double zipf_s = 1.2;
  std::size_t payload_bytes = 16;
};

struct SqlOptions {
  std::string query;
  fs::path in;
  fs::path out;
};

struct ConvertOptions {
  fs::path in;
  fs::path out;
  bool project_pattern = false;
};

struct BackendOptions {
  std::size_t memtable = 4096;
  std::size_t block_cache_bytes = 8u << 20;
  std::size_t block_bytes = 4096;
  std::size_t l0_trigger = 4;
  std::size_t fanout = 10;
  std::optional<std::uint64_t> ttl_ms;
};

struct RunOptions {
  fs::path plan;
  fs::path data;
  std::string mode = "umjoin";
  std::string schedule = "random";
  fs::path metrics;
  fs::path out;
  bool check = false;
  std::uint64_t cap_bytes = 0;
  std::string bjt_order;
  fs::path state_dir;
  std::size_t sample_every = 1000;
  BackendOptions backend;
};

struct OracleOptions {
  fs::path plan;
  fs::path data;
  fs::path out;
  bool count_only = false;
};

struct SweepOptions {
  RunOptions run;
  std::string param = "block-cache";
  std::string values;
  fs::path out;
};

void add_backend_flags(CLI::App* cmd, BackendOptions& b) {
  cmd->add_option("--memtable", b.memtable, "Memtable capacity in tuples")->check(CLI::PositiveNumber);
  cmd->add_option("--block-cache-bytes", b.block_cache_bytes, "Block cache capacity in bytes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--block-bytes", b.block_bytes, "Target data block size")->check(CLI::PositiveNumber);
  cmd->add_option("--l0-trigger", b.l0_trigger, "L0 file count that triggers compaction")->check(CLI::PositiveNumber);
  cmd->add_option("--fanout", b.fanout, "Size ratio between adjacent levels")->check(CLI::Range(2, 1000));
  cmd->add_option("--ttl-ms", b.ttl_ms, "Drop tuples older than this many logical ms");
}

void add_run_flags(CLI::App* cmd, RunOptions& r) {
  cmd->add_option("--plan", r.plan, "Plan JSON")->required();
  cmd->add_option("--data", r.data, "Directory with <table>.csv files")->required();
  cmd->add_option("--mode", r.mode, "umjoin | bjt | capped_hash");
  cmd->add_option("--schedule", r.schedule, "random | round-robin | path to a schedule file");
  cmd->add_option("--cap-bytes", r.cap_bytes, "capped_hash state budget in bytes");
  cmd->add_option("--bjt-order", r.bjt_order, "Comma-separated input permutation for bjt expansion");
  cmd->add_option("--state-dir", r.state_dir, "Directory for backend files (default: temporary)");
  cmd->add_option("--sample-every", r.sample_every, "Events between metric samples")->check(CLI::PositiveNumber);
  add_backend_flags(cmd, r.backend);
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("'" + text + "' is not a comma-separated list of integers");
    }
  }
  return out;
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

engine::EngineConfig engine_config(const RunOptions& r) {
  engine::EngineConfig cfg;
  const auto mode = engine::parse_mode(r.mode);
  if (!mode) throw ConfigError("unknown mode '" + r.mode + "'");
  cfg.mode = *mode;
  cfg.backend.memtable_capacity_entries = r.backend.memtable;
  cfg.backend.block_cache_bytes = r.backend.block_cache_bytes;
  cfg.backend.block_bytes = r.backend.block_bytes;
  cfg.backend.l0_file_trigger = r.backend.l0_trigger;
  cfg.backend.level_fanout = r.backend.fanout;
  if (r.backend.ttl_ms) cfg.backend.ttl_ms = *r.backend.ttl_ms;
  cfg.backend.validate();
  cfg.cap_bytes = r.cap_bytes;
  if (cfg.mode == engine::EngineMode::kCappedHash && cfg.cap_bytes == 0) {
    throw ConfigError("capped_hash needs --cap-bytes");
  }
  if (!r.bjt_order.empty()) cfg.bjt_order = parse_index_list(r.bjt_order);
  cfg.state_dir = r.state_dir;
  cfg.sample_every = r.sample_every;
  return cfg;
}

std::vector<std::size_t> make_schedule(const RunOptions& r, const plan::Plan& p, const Catalog& catalog,
                                       std::uint64_t seed) {
  const auto counts = engine::source_counts(p, catalog);
  std::vector<std::size_t> schedule;
  if (r.schedule == "random") {
    schedule = engine::random_schedule(counts, seed);
  } else if (r.schedule == "round-robin") {
    schedule = engine::round_robin_schedule(counts);
  } else {
    schedule = engine::parse_schedule(harness::read_text_file(r.schedule));
  }
  engine::check_schedule(schedule, counts);
  return schedule;
}

void write_or_print(const fs::path& path, std::string_view text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    harness::write_text_file(path, text);
  }
}

lsm::BackendCounters total_counters(const engine::MetricsReport& m) {
  lsm::BackendCounters t;
  for (const auto& [name, c] : m.per_stream) {
    t.blocks_read_from_disk += c.blocks_read_from_disk;
    t.cache_hits += c.cache_hits;
    t.cache_misses += c.cache_misses;
    t.bytes_written += c.bytes_written;
    t.flush_count += c.flush_count;
    t.compaction_count += c.compaction_count;
    t.probe_count += c.probe_count;
    t.tuples_inserted += c.tuples_inserted;
  }
  return t;
}

int cmd_gen(const GenOptions& o, const Globals& g) {
  harness::GenSpec spec;
  if (o.preset == "star") {
    spec = harness::star_spec(o.streams, o.rows, o.keys, g.seed);
  } else if (o.preset == "tpcds4") {
    spec = harness::tpcds4_spec(o.rows, o.keys, g.seed);
  } else {
    throw ConfigError("unknown preset '" + o.preset + "'");
  }
  for (auto& s : spec.streams) {
    if (o.dist == "zipf") {
      s.distribution = harness::KeyDistribution::kZipf;
    } else if (o.dist != "uniform") {
      throw ConfigError("unknown distribution '" + o.dist + "'");
    }
    s.zipf_s = o.zipf_s;
    s.payload_bytes = o.payload_bytes;
  }
  const auto tables = harness::generate(spec);
  harness::write_dataset(spec, tables, o.out);
  spdlog::info("wrote {} tables to {}", tables.size(), o.out.string());
  return kExitOk;
}

int cmd_sql(const SqlOptions& o) {
  if (o.query.empty() == o.in.empty()) throw ConfigError("give exactly one of --query or --in");
  const auto text = o.in.empty() ? o.query : harness::read_text_file(o.in);
  const auto p = harness::parse_query(text);
  write_or_print(o.out, plan::serialize_plan(p));
  return kExitOk;
}

int cmd_convert(const ConvertOptions& o) {
  const auto input = plan::parse_plan(harness::read_text_file(o.in));
  input.validate();
  const auto result = plan::two_step_convert(input, {o.project_pattern});
  write_or_print(o.out, plan::serialize_plan(result.plan));
  std::cerr << "groups=" << result.groups << " multijoins=" << result.multijoins << "\n";
  return kExitOk;
}

int cmd_oracle(const OracleOptions& o) {
  const auto p = plan::parse_plan(harness::read_text_file(o.plan));
  p.validate();
  const auto catalog = harness::load_catalog_for_plan(o.data, p);
  const auto rel = oracle::interpret_plan(p, catalog);
  if (o.count_only) {
    write_or_print(o.out, std::to_string(rel.rows.size()) + "\n");
  } else {
    write_or_print(o.out, render_canonical(rel));
  }
  return kExitOk;
}

int cmd_run(const RunOptions& r, const Globals& g) {
  const auto p = plan::parse_plan(harness::read_text_file(r.plan));
  p.validate();
  const auto catalog = harness::load_catalog_for_plan(r.data, p);
  auto cfg = engine_config(r);
  cfg.collect_output = r.check || !r.out.empty();
  const auto schedule = make_schedule(r, p, catalog, g.seed);
  spdlog::info("running {} events in {} mode", schedule.size(), engine::to_string(cfg.mode));

  const auto report = engine::run_pipeline(p, catalog, schedule, cfg);
  if (!r.metrics.empty()) {
    std::ofstream out(r.metrics, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + r.metrics.string());
    engine::write_metrics_jsonl(report, out);
  }
  if (!r.out.empty() && report.output) harness::write_text_file(r.out, render_canonical(*report.output));

  const auto totals = total_counters(report);
  std::cout << "mode=" << engine::to_string(report.mode) << " events=" << report.events
            << " outputs=" << report.total_outputs << " intermediate_rows=" << report.intermediate_rows
            << " rejected=" << report.rejected_events << " state_bytes=" << report.state_bytes
            << " blocks_read=" << totals.blocks_read_from_disk << " flushes=" << totals.flush_count
            << " compactions=" << totals.compaction_count << " aborted=" << (report.aborted ? "true" : "false")
            << "\n";

  if (report.aborted) {
    spdlog::warn("run aborted: {}", report.abort_reason);
    return kExitAborted;
  }
  if (r.check) {
    const auto expected = oracle::interpret_plan(p, catalog);
    if (render_canonical(expected) != render_canonical(*report.output)) {
      spdlog::error("output differs from oracle: {} rows expected, {} produced", expected.rows.size(),
                    report.output->rows.size());
      return kExitMismatch;
    }
    spdlog::info("output matches oracle ({} rows)", expected.rows.size());
  }
  return kExitOk;
}

const plan::PlanNode* first_multijoin(const plan::Plan& p) {
  for (const auto* n : plan::get_ordered_nodes(p.root())) {
    if (n->is(plan::NodeKind::kMultiJoin)) return n;
  }
  return nullptr;
}

int cmd_sweep(SweepOptions o, const Globals& g) {
  const auto p = plan::parse_plan(harness::read_text_file(o.run.plan));
  p.validate();
  const auto catalog = harness::load_catalog_for_plan(o.run.data, p);
  const auto schedule = make_schedule(o.run, p, catalog, g.seed);

  struct Point {
    std::string label;
    RunOptions run;
  };
  std::vector<Point> points;
  if (o.param == "block-cache") {
    for (auto blocks : parse_index_list(o.values.empty() ? "4,16,64" : o.values)) {
      auto r = o.run;
      r.backend.block_cache_bytes = blocks * r.backend.block_bytes;
      points.push_back({std::to_string(blocks), r});
    }
  } else if (o.param == "memtable") {
    for (auto entries : parse_index_list(o.values.empty() ? "64,256,1024" : o.values)) {
      auto r = o.run;
      r.backend.memtable = entries;
      points.push_back({std::to_string(entries), r});
    }
  } else if (o.param == "bjt-order") {
    const auto* mj = first_multijoin(p);
    if (mj == nullptr) throw ConfigError("bjt-order sweep needs a plan with a multijoin node");
    if (mj->inputs.size() > 7) throw ConfigError("too many multijoin inputs to enumerate orders");
    std::vector<std::size_t> perm(mj->inputs.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      auto r = o.run;
      r.mode = "bjt";
      r.bjt_order = join_indices(perm);
      points.push_back({r.bjt_order, r});
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    throw ConfigError("unknown sweep parameter '" + o.param + "'");
  }

  std::ostringstream lines;
  std::optional<std::pair<std::uint64_t, std::string>> best;
  for (const auto& pt : points) {
    const auto cfg = engine_config(pt.run);
    const auto report = engine::run_pipeline(p, catalog, schedule, cfg);
    const auto t = total_counters(report);
    nlohmann::json line{{"param", o.param},
                        {"value", pt.label},
                        {"mode", engine::to_string(report.mode)},
                        {"outputs", report.total_outputs},
                        {"intermediate_rows", report.intermediate_rows},
                        {"state_bytes", report.state_bytes},
                        {"blocks_read", t.blocks_read_from_disk},
                        {"cache_hits", t.cache_hits},
                        {"cache_misses", t.cache_misses},
                        {"bytes_written", t.bytes_written},
                        {"flush_count", t.flush_count},
                        {"compaction_count", t.compaction_count},
                        {"aborted", report.aborted},
                        {"elapsed_ms", report.elapsed_ms}};
    lines << line.dump() << "\n";
    spdlog::info("{}={} outputs={} blocks_read={} flushes={}", o.param, pt.label, report.total_outputs,
                 t.blocks_read_from_disk, t.flush_count);
    if (o.param == "bjt-order" && (!best || report.intermediate_rows < best->first)) {
      best = {report.intermediate_rows, pt.label};
    }
  }
  if (best) spdlog::info("fewest intermediate rows: order {} ({})", best->second, best->first);
  write_or_print(o.out, lines.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming multi-way join engine, plan rewriter and oracle"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for data generation and random schedules");
  app.add_option("--log-level", g.log_level, "trace | debug | info | warn | error | off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--preset", gen.preset, "star | tpcds4");
  gen_cmd->add_option("--streams", gen.streams, "Number of streams (star)")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--rows", gen.rows, "Tuples per stream");
  gen_cmd->add_option("--keys", gen.keys, "Key domain size")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dist", gen.dist, "uniform | zipf");
  gen_cmd->add_option("--zipf-s", gen.zipf_s, "Zipf exponent");
  gen_cmd->add_option("--payload-bytes", gen.payload_bytes, "Padding column width (0 drops it)");

  SqlOptions sql;
  auto* sql_cmd = app.add_subcommand("sql", "Parse a join query into a binary plan");
  sql_cmd->add_option("--query", sql.query, "Query text");
  sql_cmd->add_option("--in", sql.in, "File with the query text");
  sql_cmd->add_option("--out", sql.out, "Output plan JSON (default: stdout)");

  ConvertOptions conv;
  auto* conv_cmd = app.add_subcommand("convert", "Rewrite binary join trees into multijoins");
  conv_cmd->add_option("--in", conv.in, "Input plan JSON")->required();
  conv_cmd->add_option("--out", conv.out, "Output plan JSON (default: stdout)");
  conv_cmd->add_flag("--with-project-pattern", conv.project_pattern, "Absorb projections over joins");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Replay a dataset through a plan");
  add_run_flags(run_cmd, run);
  run_cmd->add_option("--metrics", run.metrics, "Metrics JSONL output");
  run_cmd->add_option("--out", run.out, "Canonical output rows");
  run_cmd->add_flag("--check", run.check, "Compare the output with the oracle (exit 3 on mismatch)");

  OracleOptions orc;
  auto* orc_cmd = app.add_subcommand("oracle", "Evaluate a plan by brute force");
  orc_cmd->add_option("--plan", orc.plan, "Plan JSON")->required();
  orc_cmd->add_option("--data", orc.data, "Directory with <table>.csv files")->required();
  orc_cmd->add_option("--out", orc.out, "Canonical output rows (default: stdout)");
  orc_cmd->add_flag("--count", orc.count_only, "Print only the row count");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one plan over a range of settings");
  add_run_flags(sweep_cmd, sweep.run);
  sweep_cmd->add_option("--param", sweep.param, "block-cache | memtable | bjt-order");
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated values (block-cache in blocks)");
  sweep_cmd->add_option("--out", sweep.out, "JSONL output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto logger = spdlog::stderr_color_mt("umjoin");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*gen_cmd) return cmd_gen(gen, g);
    if (*sql_cmd) return cmd_sql(sql);
    if (*conv_cmd) return cmd_convert(conv);
    if (*run_cmd) return cmd_run(run, g);
    if (*orc_cmd) return cmd_oracle(orc);
    if (*sweep_cmd) return cmd_sweep(sweep, g);
  } catch (const SqlError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const PlanError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return kExitConfig;
}
