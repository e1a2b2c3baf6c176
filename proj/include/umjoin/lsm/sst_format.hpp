#pragma once

// On-disk layout of a sorted string table (all integers little-endian):
//
//   [data block]* [index block] [bloom block] [footer]
//
//   data block : ( key_len:u32 key tuple_count:u32 ( seq:u64 ts:u64 payload_len:u32 payload )* )*
//                crc32:u32 over the preceding block body
//   index block: count:u32 ( last_key_len:u32 last_key offset:u64 length:u32 )*
//   bloom block: bit_len:u32 bits hash_count:u32
//   footer     : index_offset:u64 index_len:u32 bloom_offset:u64 bloom_len:u32
//                level:u32 version:u32 magic:u64

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "umjoin/lsm/stored_tuple.hpp"

namespace umjoin::lsm {

inline constexpr std::uint64_t kSstMagic = 0x554D4A4F494E5353ULL;
inline constexpr std::uint32_t kSstVersion = 1;
inline constexpr std::size_t kFooterBytes = 8 + 4 + 8 + 4 + 4 + 4 + 8;

struct BlockRecord {
  std::string key;
  std::vector<StoredTuple> tuples;
};

// Decoded data block, records in ascending key order.
struct DataBlock {
  std::vector<BlockRecord> records;

  // Binary search; nullptr when absent.
  const BlockRecord* find(std::string_view key) const;
};

struct IndexEntry {
  std::string last_key;
  std::uint64_t offset = 0;
  std::uint32_t length = 0;  // body + trailing crc
};

struct Footer {
  std::uint64_t index_offset = 0;
  std::uint32_t index_len = 0;
  std::uint64_t bloom_offset = 0;
  std::uint32_t bloom_len = 0;
  std::uint32_t level = 0;
  std::uint32_t version = kSstVersion;
  std::uint64_t magic = kSstMagic;
};

std::uint32_t crc32(std::string_view bytes);

void append_record(std::string& body, std::string_view key, const std::vector<StoredTuple>& tuples);

// Verifies the trailing crc and decodes the records. Throws DecodeError.
DataBlock decode_data_block(std::string_view block_with_crc);

std::string encode_index(const std::vector<IndexEntry>& entries);
std::vector<IndexEntry> decode_index(std::string_view block);

std::string encode_footer(const Footer& f);
Footer decode_footer(std::string_view bytes);

}  // namespace umjoin::lsm
