#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <unordered_map>

#include "umjoin/lsm/sst_format.hpp"

namespace umjoin::lsm {

// LRU cache of decoded data blocks with a byte budget. Each block is charged
// its encoded on-disk length. Blocks larger than the whole budget are not cached.
class BlockCache {
 public:
  struct BlockId {
    std::uint64_t file_seq = 0;
    std::uint64_t offset = 0;
    friend bool operator==(const BlockId&, const BlockId&) = default;
  };

  explicit BlockCache(std::size_t capacity_bytes) : capacity_(capacity_bytes) {}

  std::shared_ptr<const DataBlock> lookup(const BlockId& id);
  void insert(const BlockId& id, std::shared_ptr<const DataBlock> block, std::size_t charge);
  // Drops every block belonging to a file (called when the file is deleted).
  void erase_file(std::uint64_t file_seq);

  std::size_t capacity() const { return capacity_; }
  std::size_t usage() const { return usage_; }
  std::size_t size() const { return map_.size(); }

 private:
  struct IdHash {
    std::size_t operator()(const BlockId& id) const noexcept {
      return std::hash<std::uint64_t>()(id.file_seq * 0x9e3779b97f4a7c15ULL ^ id.offset);
    }
  };
  struct Entry {
    BlockId id;
    std::shared_ptr<const DataBlock> block;
    std::size_t charge;
  };

  void evict_to(std::size_t budget);

  std::size_t capacity_;
  std::size_t usage_ = 0;
  std::list<Entry> lru_;  // front = most recently used
  std::unordered_map<BlockId, std::list<Entry>::iterator, IdHash> map_;
};

}  // namespace umjoin::lsm
