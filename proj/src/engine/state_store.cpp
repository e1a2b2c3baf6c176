#include "umjoin/engine/state_store.hpp"

#include "umjoin/core/error.hpp"

namespace umjoin::engine {

MemoryBudget::MemoryBudget(std::uint64_t cap_bytes) : cap_(cap_bytes) {
  if (cap_bytes == 0) throw ConfigError("cap_bytes must be positive");
}

void MemoryBudget::charge(std::uint64_t bytes) {
  used_ += bytes;
  if (used_ > cap_) {
    throw OutOfMemoryError("state of " + std::to_string(used_) + " bytes exceeds cap of " + std::to_string(cap_) +
                           " bytes");
  }
}

void CappedHashStore::insert(const JoinKey& key, lsm::StoredTuple tuple) {
  const auto bytes = MemoryBudget::charge_for(key, tuple);
  table_[key.bytes].push_back(std::move(tuple));
  ++counters_.tuples_inserted;
  budget_->charge(bytes);
}

std::vector<lsm::StoredTuple> CappedHashStore::probe(const JoinKey& key) {
  ++counters_.probe_count;
  auto it = table_.find(key.bytes);
  if (it == table_.end()) return {};
  return it->second;
}

}  // namespace umjoin::engine
