#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace umjoin::lsm {

// Bloom filter with FNV-1a double hashing: probe i sets bit (h1 + i*h2) mod bit_len,
// h1 = FNV-1a-64(key), h2 = FNV-1a-64(little-endian bytes of h1). Arithmetic is mod 2^64.
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(std::size_t expected_keys, std::size_t bits_per_key, std::uint32_t hash_count);

  void add(std::string_view key);
  bool may_contain(std::string_view key) const;

  std::uint32_t bit_len() const { return bit_len_; }
  std::uint32_t hash_count() const { return hash_count_; }

  // Block layout: bit_len:u32, bits (ceil(bit_len/8) bytes), hash_count:u32.
  std::string encode() const;
  // Throws DecodeError on malformed input.
  static BloomFilter decode(std::string_view block);

  // (1 - e^{-k/b})^k for b bits per key and k hashes.
  static double theoretical_fp_rate(double bits_per_key, double hash_count);

 private:
  std::uint32_t bit_len_ = 0;
  std::uint32_t hash_count_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace umjoin::lsm
