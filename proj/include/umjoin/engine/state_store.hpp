#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "umjoin/core/codec.hpp"
#include "umjoin/lsm/backend.hpp"

namespace umjoin::engine {

// Per-input join state: a multimap from join key to the tuples seen so far.
class StateStore {
 public:
  virtual ~StateStore() = default;
  virtual void insert(const JoinKey& key, lsm::StoredTuple tuple) = 0;
  virtual std::vector<lsm::StoredTuple> probe(const JoinKey& key) = 0;
  virtual lsm::BackendCounters counters() const = 0;
};

class LsmStore final : public StateStore {
 public:
  LsmStore(std::filesystem::path dir, const lsm::BackendConfig& config) : backend_(std::move(dir), config) {}

  void insert(const JoinKey& key, lsm::StoredTuple tuple) override { backend_.insert(key, std::move(tuple)); }
  std::vector<lsm::StoredTuple> probe(const JoinKey& key) override { return backend_.probe(key); }
  lsm::BackendCounters counters() const override { return backend_.counters(); }

  lsm::LsmBackend& backend() { return backend_; }

 private:
  lsm::LsmBackend backend_;
};

// Byte budget shared by every capped store of one run.
class MemoryBudget {
 public:
  static constexpr std::uint64_t kEntryOverhead = 48;

  explicit MemoryBudget(std::uint64_t cap_bytes);

  static std::uint64_t charge_for(const JoinKey& key, const lsm::StoredTuple& t) {
    return t.payload.size() + key.bytes.size() + kEntryOverhead;
  }
  // Records `bytes` and throws OutOfMemoryError once the total exceeds the cap.
  void charge(std::uint64_t bytes);
  std::uint64_t used() const { return used_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t cap_;
  std::uint64_t used_ = 0;
};

// In-memory multimap whose growth is charged against a MemoryBudget.
class CappedHashStore final : public StateStore {
 public:
  explicit CappedHashStore(std::shared_ptr<MemoryBudget> budget) : budget_(std::move(budget)) {}

  void insert(const JoinKey& key, lsm::StoredTuple tuple) override;
  std::vector<lsm::StoredTuple> probe(const JoinKey& key) override;
  lsm::BackendCounters counters() const override { return counters_; }

 private:
  std::shared_ptr<MemoryBudget> budget_;
  std::unordered_map<std::string, std::vector<lsm::StoredTuple>> table_;
  lsm::BackendCounters counters_;
};

}  // namespace umjoin::engine
