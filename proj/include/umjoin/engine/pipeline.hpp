#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "umjoin/core/relation.hpp"
#include "umjoin/lsm/backend.hpp"
#include "umjoin/plan/plan.hpp"

namespace umjoin::engine {

enum class EngineMode { kUmjoin, kBjt, kCappedHash };

std::string_view to_string(EngineMode mode);
std::optional<EngineMode> parse_mode(std::string_view text);

struct EngineConfig {
  EngineMode mode = EngineMode::kUmjoin;
  lsm::BackendConfig backend;
  std::uint64_t cap_bytes = 0;            // capped_hash: budget over all state
  std::vector<std::size_t> bjt_order;     // bjt: input permutation used when expanding multijoins
  std::filesystem::path state_dir;        // empty: a fresh temporary directory
  std::size_t sample_every = 1000;        // events between metric samples
  bool collect_output = false;            // keep output rows instead of only counting them
};

// One event source per scan node of a plan.
struct SourceInfo {
  std::string node_id;
  std::string alias;
  std::string table;
};

// Sources in schedule order: scan nodes sorted by alias.
std::vector<SourceInfo> plan_sources(const plan::Plan& plan);

// Row count of each source's table, in source order. Throws ConfigError for a
// table missing from `tables`.
std::vector<std::size_t> source_counts(const plan::Plan& plan, const Catalog& tables);

struct MetricsSample {
  double t_ms = 0;
  std::uint64_t events = 0;
  std::uint64_t outputs = 0;
  std::map<std::string, lsm::BackendCounters> per_stream;
};

struct MetricsReport {
  EngineMode mode = EngineMode::kUmjoin;
  std::vector<MetricsSample> samples;
  std::uint64_t events = 0;
  std::uint64_t total_outputs = 0;
  std::uint64_t intermediate_rows = 0;  // rows emitted by joins that feed other joins
  std::uint64_t rejected_events = 0;
  std::uint64_t state_bytes = 0;        // payload + key + 48 per stored tuple, over all stores
  std::map<std::string, lsm::BackendCounters> per_stream;
  bool aborted = false;
  std::string abort_reason;
  double elapsed_ms = 0;
  std::optional<Relation> output;       // when collect_output is set
};

// Interleavings over sources; each entry is a source index, and source i must
// appear exactly counts[i] times.
std::vector<std::size_t> round_robin_schedule(std::span<const std::size_t> counts);
std::vector<std::size_t> random_schedule(std::span<const std::size_t> counts, std::uint64_t seed);
// One source index per non-empty line.
std::vector<std::size_t> parse_schedule(std::string_view text);
void check_schedule(std::span<const std::size_t> schedule, std::span<const std::size_t> counts);

// Executes the plan as a push-based operator graph over the scheduled events.
// umjoin and capped_hash modes need multijoin nodes in place of binary joins;
// bjt mode runs binary joins as two-way nodes and expands multijoins into
// left-deep trees. Throws ConfigError on a plan/mode mismatch before any event
// is consumed.
MetricsReport run_pipeline(const plan::Plan& plan, const Catalog& tables, std::span<const std::size_t> schedule,
                           const EngineConfig& config);

// JSON lines: one object per sample, then a summary object with "final": true.
void write_metrics_jsonl(const MetricsReport& report, std::ostream& out);

}  // namespace umjoin::engine
