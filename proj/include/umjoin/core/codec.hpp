#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "umjoin/core/value.hpp"

namespace umjoin {

// Canonical, order-preserving byte encoding of the equi-join key fields.
// Equal key values produce equal bytes and byte order equals value order
// for keys built from the same field types.
struct JoinKey {
  std::string bytes;

  friend bool operator==(const JoinKey&, const JoinKey&) = default;
  friend std::strong_ordering operator<=>(const JoinKey& a, const JoinKey& b) {
    const int c = a.bytes.compare(b.bytes);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
};

JoinKey encode_key(std::span<const Value> values);
JoinKey encode_key(const Value& value);

// Self-describing row encoding used as the stored tuple payload.
std::string encode_row(const Row& row);
Row decode_row(std::string_view bytes);

// Little-endian fixed-width integer helpers.
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);

class DecodeError : public std::exception {
 public:
  explicit DecodeError(const char* what) : what_(what) {}
  const char* what() const noexcept override { return what_; }

 private:
  const char* what_;
};

// Bounds-checked cursor over an encoded buffer. Throws DecodeError on overrun.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::string_view bytes(std::size_t n);

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace umjoin
