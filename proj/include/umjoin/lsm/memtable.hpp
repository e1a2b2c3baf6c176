#pragma once

#include <cstddef>
#include <vector>

#include "umjoin/core/codec.hpp"
#include "umjoin/lsm/skiplist.hpp"
#include "umjoin/lsm/stored_tuple.hpp"

namespace umjoin::lsm {

// In-memory write buffer: join key -> list of tuples in insertion order.
class MemTable {
 public:
  using Table = SkipList<JoinKey, std::vector<StoredTuple>>;

  enum class State { kActive, kFrozen };

  explicit MemTable(std::uint64_t id) : id_(id), table_(0x9e3779b97f4a7c15ULL ^ id) {}

  // Throws std::logic_error when the table is frozen.
  void insert(const JoinKey& key, StoredTuple tuple);

  const std::vector<StoredTuple>* find(const JoinKey& key) const { return table_.find(key); }

  void freeze() { state_ = State::kFrozen; }
  State state() const { return state_; }
  bool frozen() const { return state_ == State::kFrozen; }

  std::uint64_t id() const { return id_; }
  std::size_t entry_count() const { return entry_count_; }
  std::size_t key_count() const { return table_.size(); }
  std::size_t approximate_bytes() const { return bytes_; }

  Table::const_iterator begin() const { return table_.begin(); }
  Table::const_iterator end() const { return table_.end(); }

 private:
  std::uint64_t id_;
  Table table_;
  State state_ = State::kActive;
  std::size_t entry_count_ = 0;
  std::size_t bytes_ = 0;
};

}  // namespace umjoin::lsm
