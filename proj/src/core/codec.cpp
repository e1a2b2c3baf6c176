#include "umjoin/core/codec.hpp"

#include "umjoin/core/error.hpp"

namespace umjoin {
namespace {

constexpr std::uint8_t kIntTag = 0x01;
constexpr std::uint8_t kStringTag = 0x02;

void append_key_part(std::string& out, const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    // Flip the sign bit so two's complement order matches unsigned byte order.
    const auto u = static_cast<std::uint64_t>(*i) ^ (std::uint64_t{1} << 63);
    out.push_back(static_cast<char>(kIntTag));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((u >> shift) & 0xff));
    return;
  }
  // 0x00 is escaped as 0x00 0xff and the field ends with 0x00 0x01, which keeps
  // composite keys prefix-free and order preserving.
  out.push_back(static_cast<char>(kStringTag));
  for (char c : std::get<std::string>(v)) {
    out.push_back(c);
    if (c == '\0') out.push_back(static_cast<char>(0xff));
  }
  out.push_back('\0');
  out.push_back('\x01');
}

}  // namespace

JoinKey encode_key(std::span<const Value> values) {
  JoinKey key;
  for (const auto& v : values) append_key_part(key.bytes, v);
  return key;
}

JoinKey encode_key(const Value& value) { return encode_key(std::span<const Value>(&value, 1)); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string encode_row(const Row& row) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(row.size()));
  for (const auto& v : row) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      out.push_back(static_cast<char>(kIntTag));
      put_u64(out, static_cast<std::uint64_t>(*i));
    } else {
      const auto& s = std::get<std::string>(v);
      out.push_back(static_cast<char>(kStringTag));
      put_u32(out, static_cast<std::uint32_t>(s.size()));
      out.append(s);
    }
  }
  return out;
}

Row decode_row(std::string_view bytes) {
  ByteReader in(bytes);
  const auto n = in.u32();
  if (n > in.remaining()) throw DecodeError("row field count exceeds buffer");
  Row row;
  row.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto tag = in.u8();
    if (tag == kIntTag) {
      row.emplace_back(static_cast<std::int64_t>(in.u64()));
    } else if (tag == kStringTag) {
      const auto len = in.u32();
      row.emplace_back(std::string(in.bytes(len)));
    } else {
      throw DecodeError("unknown field tag");
    }
  }
  if (!in.done()) throw DecodeError("trailing bytes after row");
  return row;
}

void ByteReader::need(std::size_t n) const {
  if (n > data_.size() - pos_) throw DecodeError("read past end of buffer");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(data_[pos_ + i])} << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(data_[pos_ + i])} << (8 * i);
  pos_ += 8;
  return v;
}

std::string_view ByteReader::bytes(std::size_t n) {
  need(n);
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace umjoin
