#include "umjoin/lsm/sst_format.hpp"

#include <zlib.h>

#include <algorithm>

#include "umjoin/core/codec.hpp"

namespace umjoin::lsm {

const BlockRecord* DataBlock::find(std::string_view key) const {
  auto it = std::lower_bound(records.begin(), records.end(), key,
                             [](const BlockRecord& r, std::string_view k) { return r.key < k; });
  if (it == records.end() || it->key != key) return nullptr;
  return &*it;
}

std::uint32_t crc32(std::string_view bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; blocks stay far below 4 GiB.
  c = ::crc32(c, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

void append_record(std::string& body, std::string_view key, const std::vector<StoredTuple>& tuples) {
  put_u32(body, static_cast<std::uint32_t>(key.size()));
  body.append(key);
  put_u32(body, static_cast<std::uint32_t>(tuples.size()));
  for (const auto& t : tuples) {
    put_u64(body, t.seq);
    put_u64(body, t.ts);
    put_u32(body, static_cast<std::uint32_t>(t.payload.size()));
    body.append(t.payload);
  }
}

DataBlock decode_data_block(std::string_view block) {
  if (block.size() < 4) throw DecodeError("data block shorter than its checksum");
  const auto body = block.substr(0, block.size() - 4);
  ByteReader crc_in(block.substr(block.size() - 4));
  if (crc_in.u32() != crc32(body)) throw DecodeError("data block checksum mismatch");

  DataBlock out;
  ByteReader in(body);
  while (!in.done()) {
    BlockRecord rec;
    rec.key = std::string(in.bytes(in.u32()));
    const auto n = in.u32();
    rec.tuples.reserve(std::min<std::size_t>(n, in.remaining() / 20));
    for (std::uint32_t i = 0; i < n; ++i) {
      StoredTuple t;
      t.seq = in.u64();
      t.ts = in.u64();
      t.payload = std::string(in.bytes(in.u32()));
      rec.tuples.push_back(std::move(t));
    }
    if (!out.records.empty() && !(out.records.back().key < rec.key)) {
      throw DecodeError("data block keys out of order");
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string encode_index(const std::vector<IndexEntry>& entries) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put_u32(out, static_cast<std::uint32_t>(e.last_key.size()));
    out.append(e.last_key);
    put_u64(out, e.offset);
    put_u32(out, e.length);
  }
  return out;
}

std::vector<IndexEntry> decode_index(std::string_view block) {
  ByteReader in(block);
  const auto n = in.u32();
  std::vector<IndexEntry> out;
  out.reserve(std::min<std::size_t>(n, in.remaining() / 16));
  for (std::uint32_t i = 0; i < n; ++i) {
    IndexEntry e;
    e.last_key = std::string(in.bytes(in.u32()));
    e.offset = in.u64();
    e.length = in.u32();
    out.push_back(std::move(e));
  }
  if (!in.done()) throw DecodeError("trailing bytes after index block");
  return out;
}

std::string encode_footer(const Footer& f) {
  std::string out;
  put_u64(out, f.index_offset);
  put_u32(out, f.index_len);
  put_u64(out, f.bloom_offset);
  put_u32(out, f.bloom_len);
  put_u32(out, f.level);
  put_u32(out, f.version);
  put_u64(out, f.magic);
  return out;
}

Footer decode_footer(std::string_view bytes) {
  ByteReader in(bytes);
  Footer f;
  f.index_offset = in.u64();
  f.index_len = in.u32();
  f.bloom_offset = in.u64();
  f.bloom_len = in.u32();
  f.level = in.u32();
  f.version = in.u32();
  f.magic = in.u64();
  if (f.magic != kSstMagic) throw DecodeError("bad footer magic");
  if (f.version != kSstVersion) throw DecodeError("unsupported sst version");
  return f;
}

}  // namespace umjoin::lsm
