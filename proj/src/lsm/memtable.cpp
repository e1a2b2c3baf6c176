#include "umjoin/lsm/memtable.hpp"

#include <stdexcept>

namespace umjoin::lsm {

void MemTable::insert(const JoinKey& key, StoredTuple tuple) {
  if (frozen()) throw std::logic_error("insert into frozen memtable");
  auto& list = table_.get_or_insert(key);
  if (list.empty()) bytes_ += key.bytes.size();
  bytes_ += tuple.payload.size() + 2 * sizeof(std::uint64_t);
  list.push_back(std::move(tuple));
  ++entry_count_;
}

}  // namespace umjoin::lsm
