#include "umjoin/lsm/backend.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

#include "umjoin/core/error.hpp"

namespace umjoin::lsm {

void BackendConfig::validate() const {
  auto positive = [](std::uint64_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("backend config: ") + name + " must be positive");
  };
  positive(memtable_capacity_entries, "memtable_capacity_entries");
  positive(block_bytes, "block_bytes");
  positive(l0_file_trigger, "l0_file_trigger");
  positive(ttl_ms, "ttl_ms");
  positive(bloom_bits_per_key, "bloom_bits_per_key");
  positive(bloom_hashes, "bloom_hashes");
  positive(level_base_bytes, "level_base_bytes");
  positive(target_file_bytes, "target_file_bytes");
  if (level_fanout < 2) throw ConfigError("backend config: level_fanout must be >= 2");
  if (max_levels < 2) throw ConfigError("backend config: max_levels must be >= 2");
}

LsmBackend::LsmBackend(std::filesystem::path dir, BackendConfig config)
    : dir_(std::move(dir)), config_(config), cache_(config.block_cache_bytes) {
  config_.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageError("create directory " + dir_.string() + ": " + ec.message());
  for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
    if (entry.path().extension() == ".sst") {
      throw ConfigError("state directory " + dir_.string() + " already holds table files");
    }
  }
  active_ = std::make_unique<MemTable>(next_memtable_id_++);
  levels_.resize(config_.max_levels);
}

LsmBackend::~LsmBackend() {
  // No recovery exists, so table files do not outlive their backend.
  for (auto& level : levels_) {
    for (auto& f : level) {
      std::error_code ec;
      std::filesystem::remove(f->path(), ec);
    }
  }
}

std::uint64_t LsmBackend::now() const { return clock_ ? clock_() : max_ts_; }

std::filesystem::path LsmBackend::file_path(std::size_t level, std::uint64_t file_seq) const {
  return dir_ / ("L" + std::to_string(level) + "-" + std::to_string(file_seq) + ".sst");
}

void LsmBackend::insert(const JoinKey& key, StoredTuple tuple) {
  if (has_seq_ && tuple.seq <= last_seq_) {
    throw std::invalid_argument("tuple seq " + std::to_string(tuple.seq) + " is not increasing");
  }
  has_seq_ = true;
  last_seq_ = tuple.seq;
  max_ts_ = std::max(max_ts_, tuple.ts);
  active_->insert(key, std::move(tuple));
  ++counters_.tuples_inserted;

  if (active_->entry_count() >= config_.memtable_capacity_entries) {
    active_->freeze();
    frozen_.push_back(std::move(active_));
    active_ = std::make_unique<MemTable>(next_memtable_id_++);
  }
  if (config_.auto_flush) flush_all();
}

std::vector<StoredTuple> LsmBackend::probe(const JoinKey& key, std::uint64_t now_ms) {
  std::lock_guard<std::mutex> lock(probe_mu_);
  ++counters_.probe_count;
  std::vector<StoredTuple> out;
  auto take = [&](const std::vector<StoredTuple>* list) {
    if (list == nullptr) return;
    for (const auto& t : *list) {
      if (!is_expired(t, config_.ttl_ms, now_ms)) out.push_back(t);
    }
  };

  take(active_->find(key));
  for (auto it = frozen_.rbegin(); it != frozen_.rend(); ++it) take((*it)->find(key));

  const auto& l0 = levels_[0];
  for (auto it = l0.rbegin(); it != l0.rend(); ++it) probe_file(**it, key, now_ms, out);

  for (std::size_t level = 1; level < levels_.size(); ++level) {
    const auto& files = levels_[level];
    auto it = std::lower_bound(files.begin(), files.end(), key, [](const FilePtr& f, const JoinKey& k) {
      return std::string_view(f->max_key()) < std::string_view(k.bytes);
    });
    if (it != files.end()) probe_file(**it, key, now_ms, out);
  }

  std::sort(out.begin(), out.end(), [](const StoredTuple& a, const StoredTuple& b) { return a.seq < b.seq; });
  return out;
}

void LsmBackend::probe_file(const SstReader& file, const JoinKey& key, std::uint64_t now_ms,
                            std::vector<StoredTuple>& out) {
  const auto block = file.block_for(key.bytes);
  if (!block || !file.may_contain(key.bytes)) return;

  const auto& entry = file.block_index()[*block];
  const BlockCache::BlockId id{file.file_seq(), entry.offset};
  auto data = cache_.lookup(id);
  if (data) {
    ++counters_.cache_hits;
  } else {
    ++counters_.cache_misses;
    ++counters_.blocks_read_from_disk;
    data = std::make_shared<const DataBlock>(file.read_block(*block));
    cache_.insert(id, data, entry.length);
  }
  if (const auto* rec = data->find(key.bytes)) {
    for (const auto& t : rec->tuples) {
      if (!is_expired(t, config_.ttl_ms, now_ms)) out.push_back(t);
    }
  }
}

void LsmBackend::flush() {
  if (frozen_.empty()) return;
  const MemTable& table = *frozen_.front();

  const std::uint64_t file_seq = next_file_seq_;
  const auto path = file_path(0, file_seq);
  std::uint64_t size = 0;
  {
    SstBuilder builder(path, 0, SstOptions{config_.block_bytes, config_.bloom_bits_per_key, config_.bloom_hashes});
    for (auto it = table.begin(); it != table.end(); ++it) builder.add(it.key().bytes, it.value());
    size = builder.finish();
  }
  ++next_file_seq_;
  std::shared_ptr<const SstReader> reader;
  try {
    reader = std::make_shared<const SstReader>(path, file_seq);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw;
  }
  if (observer_) observer_(FileEvent::kCreated, path);

  levels_[0].push_back(std::move(reader));
  frozen_.pop_front();
  ++counters_.flush_count;
  counters_.bytes_written += size;

  if (levels_[0].size() >= config_.l0_file_trigger) compact(0);
}

void LsmBackend::flush_all() {
  while (!frozen_.empty()) flush();
}

void LsmBackend::checkpoint_to_disk() {
  if (active_->entry_count() > 0) {
    active_->freeze();
    frozen_.push_back(std::move(active_));
    active_ = std::make_unique<MemTable>(next_memtable_id_++);
  }
  flush_all();
}

void LsmBackend::compact(std::size_t level) {
  if (level + 1 >= levels_.size()) {
    throw std::invalid_argument("compact: level " + std::to_string(level) + " has no next level");
  }
  compact_one(level);
  for (std::size_t next = level + 1; next + 1 < levels_.size(); ++next) {
    if (level_bytes(next) <= level_target_bytes(next)) break;
    compact_one(next);
  }
}

namespace {

// Sequential reader over every record of one file, used by compaction.
class FileCursor {
 public:
  FileCursor(const SstReader& file, std::uint64_t& blocks_read) : file_(&file), blocks_read_(&blocks_read) {
    load(0);
  }

  bool valid() const { return block_ < file_->block_index().size(); }
  const BlockRecord& record() const { return data_.records[record_]; }
  void next() {
    if (++record_ >= data_.records.size()) load(block_ + 1);
  }

 private:
  void load(std::size_t block) {
    block_ = block;
    record_ = 0;
    if (!valid()) return;
    data_ = file_->read_block(block_);
    ++*blocks_read_;
  }

  const SstReader* file_;
  std::uint64_t* blocks_read_;
  std::size_t block_ = 0;
  std::size_t record_ = 0;
  DataBlock data_;
};

}  // namespace

void LsmBackend::compact_one(std::size_t level) {
  std::vector<FilePtr> inputs = levels_[level];
  inputs.insert(inputs.end(), levels_[level + 1].begin(), levels_[level + 1].end());
  if (inputs.empty()) return;

  const std::uint64_t now_ms = now();
  const std::size_t out_level = level + 1;
  const SstOptions options{config_.block_bytes, config_.bloom_bits_per_key, config_.bloom_hashes};

  std::vector<FileCursor> cursors;
  cursors.reserve(inputs.size());
  for (const auto& f : inputs) cursors.emplace_back(*f, counters_.blocks_read_from_disk);

  auto greater = [&](std::size_t a, std::size_t b) {
    const auto& ka = cursors[a].record().key;
    const auto& kb = cursors[b].record().key;
    return ka != kb ? ka > kb : a > b;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(greater)> heap(greater);
  for (std::size_t i = 0; i < cursors.size(); ++i) {
    if (cursors[i].valid()) heap.push(i);
  }

  struct Output {
    std::filesystem::path path;
    std::uint64_t file_seq;
    std::uint64_t size;
  };
  std::vector<Output> outputs;
  std::unique_ptr<SstBuilder> builder;
  std::uint64_t builder_seq = 0;
  std::vector<FilePtr> new_files;

  auto finish_builder = [&] {
    if (!builder) return;
    if (builder->key_count() > 0) {
      const auto size = builder->finish();
      outputs.push_back({builder->path(), builder_seq, size});
    } else {
      builder->abandon();
    }
    builder.reset();
  };

  try {
    std::vector<StoredTuple> merged;
    while (!heap.empty()) {
      const std::string key = cursors[heap.top()].record().key;
      merged.clear();
      while (!heap.empty() && cursors[heap.top()].record().key == key) {
        const std::size_t i = heap.top();
        heap.pop();
        for (const auto& t : cursors[i].record().tuples) {
          if (!is_expired(t, config_.ttl_ms, now_ms)) merged.push_back(t);
        }
        cursors[i].next();
        if (cursors[i].valid()) heap.push(i);
      }
      if (merged.empty()) continue;
      std::sort(merged.begin(), merged.end(),
                [](const StoredTuple& a, const StoredTuple& b) { return a.seq < b.seq; });

      if (!builder) {
        builder_seq = next_file_seq_++;
        builder = std::make_unique<SstBuilder>(file_path(out_level, builder_seq), out_level, options);
      }
      builder->add(key, merged);
      if (builder->estimated_size() >= config_.target_file_bytes) finish_builder();
    }
    finish_builder();
    for (const auto& o : outputs) new_files.push_back(std::make_shared<const SstReader>(o.path, o.file_seq));
  } catch (...) {
    if (builder) builder->abandon();
    for (const auto& o : outputs) {
      std::error_code ec;
      std::filesystem::remove(o.path, ec);
    }
    throw;
  }

  for (const auto& o : outputs) {
    counters_.bytes_written += o.size;
    if (observer_) observer_(FileEvent::kCreated, o.path);
  }

  levels_[level].clear();
  levels_[out_level] = std::move(new_files);
  ++counters_.compaction_count;

  for (const auto& f : inputs) delete_file(*f);
}

void LsmBackend::delete_file(const SstReader& file) {
  if (observer_) observer_(FileEvent::kDeleting, file.path());
  cache_.erase_file(file.file_seq());
  std::error_code ec;
  std::filesystem::remove(file.path(), ec);
}

BackendCounters LsmBackend::counters() const {
  std::lock_guard<std::mutex> lock(probe_mu_);
  return counters_;
}

std::size_t LsmBackend::level_file_count(std::size_t level) const {
  return level < levels_.size() ? levels_[level].size() : 0;
}

std::uint64_t LsmBackend::level_bytes(std::size_t level) const {
  std::uint64_t total = 0;
  if (level < levels_.size()) {
    for (const auto& f : levels_[level]) total += f->file_size();
  }
  return total;
}

std::uint64_t LsmBackend::level_target_bytes(std::size_t level) const {
  if (level == 0) return 0;
  std::uint64_t target = config_.level_base_bytes;
  for (std::size_t i = 1; i < level; ++i) target *= config_.level_fanout;
  return target;
}

std::vector<std::filesystem::path> LsmBackend::files() const {
  std::vector<std::filesystem::path> out;
  for (const auto& level : levels_) {
    for (const auto& f : level) out.push_back(f->path());
  }
  return out;
}

std::size_t LsmBackend::cache_usage() const {
  std::lock_guard<std::mutex> lock(probe_mu_);
  return cache_.usage();
}

}  // namespace umjoin::lsm
