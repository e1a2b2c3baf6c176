#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "umjoin/lsm/bloom.hpp"
#include "umjoin/lsm/sst_format.hpp"

namespace umjoin::lsm {

// Read-only file handle with positional reads. Owns the descriptor.
class RandomAccessFile {
 public:
  explicit RandomAccessFile(const std::filesystem::path& path);
  ~RandomAccessFile();
  RandomAccessFile(const RandomAccessFile&) = delete;
  RandomAccessFile& operator=(const RandomAccessFile&) = delete;
  RandomAccessFile(RandomAccessFile&& other) noexcept;
  RandomAccessFile& operator=(RandomAccessFile&& other) noexcept;

  std::string read(std::uint64_t offset, std::size_t n) const;
  std::uint64_t size() const { return size_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::uint64_t size_ = 0;
};

struct SstOptions {
  std::size_t block_bytes = 4096;
  std::size_t bloom_bits_per_key = 10;
  std::uint32_t bloom_hashes = 7;
};

// Streams sorted records into a new table file. The file appears under its
// final name only after finish() has written every byte.
class SstBuilder {
 public:
  SstBuilder(std::filesystem::path path, std::uint32_t level, SstOptions options);
  ~SstBuilder();
  SstBuilder(const SstBuilder&) = delete;
  SstBuilder& operator=(const SstBuilder&) = delete;

  // Keys must be strictly increasing across calls.
  void add(std::string_view key, const std::vector<StoredTuple>& tuples);

  // Writes index, bloom and footer and renames the temp file. Returns file size.
  std::uint64_t finish();
  // Removes the temp file; safe to call after a failure.
  void abandon();

  std::uint64_t estimated_size() const { return offset_ + pending_.size(); }
  std::size_t key_count() const { return keys_.size(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  void flush_block();
  void write(std::string_view bytes);

  std::filesystem::path path_;
  std::filesystem::path tmp_path_;
  std::uint32_t level_;
  SstOptions options_;
  int fd_ = -1;
  std::uint64_t offset_ = 0;
  std::string pending_;
  std::string pending_last_key_;
  std::string last_key_;
  std::vector<IndexEntry> index_;
  std::vector<std::string> keys_;
  bool finished_ = false;
};

// Immutable view of one table file: footer, index and bloom are held in memory,
// data blocks are read on demand.
class SstReader {
 public:
  SstReader(std::filesystem::path path, std::uint64_t file_seq);

  const std::filesystem::path& path() const { return path_; }
  std::uint64_t file_seq() const { return file_seq_; }
  std::uint32_t level() const { return footer_.level; }
  std::uint64_t file_size() const { return file_.size(); }
  const std::string& min_key() const { return min_key_; }
  const std::string& max_key() const { return index_.back().last_key; }
  const std::vector<IndexEntry>& block_index() const { return index_; }
  const BloomFilter& bloom() const { return bloom_; }

  bool may_contain(std::string_view key) const;
  // First block whose last_key >= key, if key lies within [min_key, max_key].
  std::optional<std::size_t> block_for(std::string_view key) const;
  // Throws CorruptionError naming this file on checksum or decode failure.
  DataBlock read_block(std::size_t block) const;

 private:
  std::filesystem::path path_;
  std::uint64_t file_seq_;
  RandomAccessFile file_;
  Footer footer_;
  std::vector<IndexEntry> index_;
  BloomFilter bloom_;
  std::string min_key_;
};

}  // namespace umjoin::lsm
