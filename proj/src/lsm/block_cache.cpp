#include "umjoin/lsm/block_cache.hpp"

namespace umjoin::lsm {

std::shared_ptr<const DataBlock> BlockCache::lookup(const BlockId& id) {
  auto it = map_.find(id);
  if (it == map_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->block;
}

void BlockCache::insert(const BlockId& id, std::shared_ptr<const DataBlock> block, std::size_t charge) {
  if (charge > capacity_) return;
  if (auto it = map_.find(id); it != map_.end()) {
    usage_ -= it->second->charge;
    lru_.erase(it->second);
    map_.erase(it);
  }
  evict_to(capacity_ - charge);
  lru_.push_front(Entry{id, std::move(block), charge});
  map_.emplace(id, lru_.begin());
  usage_ += charge;
}

void BlockCache::erase_file(std::uint64_t file_seq) {
  for (auto it = lru_.begin(); it != lru_.end();) {
    if (it->id.file_seq == file_seq) {
      usage_ -= it->charge;
      map_.erase(it->id);
      it = lru_.erase(it);
    } else {
      ++it;
    }
  }
}

void BlockCache::evict_to(std::size_t budget) {
  while (usage_ > budget && !lru_.empty()) {
    auto& victim = lru_.back();
    usage_ -= victim.charge;
    map_.erase(victim.id);
    lru_.pop_back();
  }
}

}  // namespace umjoin::lsm
