#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "umjoin/core/codec.hpp"
#include "umjoin/lsm/block_cache.hpp"
#include "umjoin/lsm/memtable.hpp"
#include "umjoin/lsm/sst.hpp"

namespace umjoin::lsm {

struct BackendConfig {
  std::size_t memtable_capacity_entries = 4096;  // rotation threshold, in tuples
  std::size_t block_cache_bytes = 8u << 20;
  std::size_t block_bytes = 4096;
  std::size_t l0_file_trigger = 4;
  std::size_t level_fanout = 10;
  std::uint64_t ttl_ms = kNoTtl;
  std::size_t bloom_bits_per_key = 10;
  std::uint32_t bloom_hashes = 7;
  std::size_t max_levels = 7;
  std::uint64_t level_base_bytes = 1u << 20;  // target size of L1; Ln = base * fanout^(n-1)
  std::uint64_t target_file_bytes = 2u << 20;  // compaction output split size
  bool auto_flush = true;                     // flush frozen tables inside insert()

  // Throws ConfigError.
  void validate() const;
};

// Monotone counters; a snapshot is returned by LsmBackend::counters().
struct BackendCounters {
  std::uint64_t blocks_read_from_disk = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t flush_count = 0;
  std::uint64_t compaction_count = 0;
  std::uint64_t probe_count = 0;
  std::uint64_t tuples_inserted = 0;

  friend bool operator==(const BackendCounters&, const BackendCounters&) = default;
};

enum class FileEvent { kCreated, kDeleting };

// Per-stream multimap state store: an active memtable, frozen memtables awaiting
// flush, an LRU block cache and leveled immutable table files on disk.
//
// Probes are multimap unions across every tier, ordered by seq. Mutating calls
// need exclusive access; concurrent probes are serialized internally.
class LsmBackend {
 public:
  using Clock = std::function<std::uint64_t()>;
  using FileObserver = std::function<void(FileEvent, const std::filesystem::path&)>;

  // `dir` is created if missing and must not already hold table files.
  LsmBackend(std::filesystem::path dir, BackendConfig config);
  ~LsmBackend();
  LsmBackend(const LsmBackend&) = delete;
  LsmBackend& operator=(const LsmBackend&) = delete;

  // tuple.seq must exceed every previously inserted seq.
  void insert(const JoinKey& key, StoredTuple tuple);

  std::vector<StoredTuple> probe(const JoinKey& key, std::uint64_t now_ms);
  std::vector<StoredTuple> probe(const JoinKey& key) { return probe(key, now()); }

  // Writes the oldest frozen memtable to a new L0 file. No-op without frozen tables.
  void flush();
  void flush_all();
  // Freezes the active memtable (if non-empty) and flushes everything.
  void checkpoint_to_disk();

  // Merges all of `level` into `level + 1`; cascades while the next level is over target.
  void compact(std::size_t level);

  BackendCounters counters() const;

  // Clock used for expiry during compaction. Defaults to the largest ts inserted so far.
  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_file_observer(FileObserver observer) { observer_ = std::move(observer); }

  const BackendConfig& config() const { return config_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::size_t frozen_count() const { return frozen_.size(); }
  std::size_t active_entries() const { return active_->entry_count(); }
  std::size_t level_file_count(std::size_t level) const;
  std::uint64_t level_bytes(std::size_t level) const;
  std::uint64_t level_target_bytes(std::size_t level) const;
  std::vector<std::filesystem::path> files() const;
  std::size_t cache_usage() const;
  std::uint64_t next_seq() const { return last_seq_ + 1; }

 private:
  using FilePtr = std::shared_ptr<const SstReader>;

  std::uint64_t now() const;
  std::filesystem::path file_path(std::size_t level, std::uint64_t file_seq) const;
  void probe_file(const SstReader& file, const JoinKey& key, std::uint64_t now_ms,
                  std::vector<StoredTuple>& out);
  void compact_one(std::size_t level);
  void delete_file(const SstReader& file);

  std::filesystem::path dir_;
  BackendConfig config_;
  std::unique_ptr<MemTable> active_;
  std::deque<std::unique_ptr<MemTable>> frozen_;  // oldest first
  std::vector<std::vector<FilePtr>> levels_;      // L0 oldest first; L1+ sorted by min_key
  BlockCache cache_;
  mutable std::mutex probe_mu_;
  BackendCounters counters_;
  std::uint64_t next_memtable_id_ = 1;
  std::uint64_t next_file_seq_ = 1;
  std::uint64_t last_seq_ = 0;
  bool has_seq_ = false;
  std::uint64_t max_ts_ = 0;
  Clock clock_;
  FileObserver observer_;
};

}  // namespace umjoin::lsm
