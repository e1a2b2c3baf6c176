#include "umjoin/lsm/bloom.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "umjoin/core/codec.hpp"

namespace umjoin::lsm {

BloomFilter::BloomFilter(std::size_t expected_keys, std::size_t bits_per_key, std::uint32_t hash_count)
    : hash_count_(hash_count) {
  bit_len_ = static_cast<std::uint32_t>(std::max<std::size_t>(64, expected_keys * bits_per_key));
  bits_.assign((bit_len_ + 7) / 8, 0);
}

namespace {

// h1 is FNV-1a of the key; h2 is FNV-1a of h1's little-endian bytes. Splitting
// one FNV hash into halves correlates badly on short integer keys.
std::pair<std::uint64_t, std::uint64_t> probe_hashes(std::string_view key) {
  const std::uint64_t h1 = fnv1a64(key);
  std::string h1_bytes;
  put_u64(h1_bytes, h1);
  return {h1, fnv1a64(h1_bytes)};
}

}  // namespace

void BloomFilter::add(std::string_view key) {
  const auto [h1, h2] = probe_hashes(key);
  for (std::uint32_t i = 0; i < hash_count_; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % bit_len_;
    bits_[bit >> 3] |= static_cast<std::uint8_t>(1u << (bit & 7));
  }
}

bool BloomFilter::may_contain(std::string_view key) const {
  if (bit_len_ == 0) return false;
  const auto [h1, h2] = probe_hashes(key);
  for (std::uint32_t i = 0; i < hash_count_; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % bit_len_;
    if ((bits_[bit >> 3] & (1u << (bit & 7))) == 0) return false;
  }
  return true;
}

std::string BloomFilter::encode() const {
  std::string out;
  put_u32(out, bit_len_);
  out.append(reinterpret_cast<const char*>(bits_.data()), bits_.size());
  put_u32(out, hash_count_);
  return out;
}

BloomFilter BloomFilter::decode(std::string_view block) {
  ByteReader in(block);
  BloomFilter f;
  f.bit_len_ = in.u32();
  if (f.bit_len_ == 0) throw DecodeError("bloom bit_len is zero");
  const auto bytes = in.bytes((f.bit_len_ + 7) / 8);
  f.bits_.assign(bytes.begin(), bytes.end());
  f.hash_count_ = in.u32();
  if (!in.done()) throw DecodeError("trailing bytes after bloom block");
  return f;
}

double BloomFilter::theoretical_fp_rate(double bits_per_key, double hash_count) {
  return std::pow(1.0 - std::exp(-hash_count / bits_per_key), hash_count);
}

}  // namespace umjoin::lsm
