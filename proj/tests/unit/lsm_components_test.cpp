#include <gtest/gtest.h>

#include <map>
#include <random>

#include "test_util.hpp"
#include "umjoin/core/error.hpp"
#include "umjoin/lsm/block_cache.hpp"
#include "umjoin/lsm/bloom.hpp"
#include "umjoin/lsm/memtable.hpp"
#include "umjoin/lsm/skiplist.hpp"
#include "umjoin/lsm/sst.hpp"

namespace umjoin::lsm {
namespace {

using testing::int_key;
using testing::TempDir;

TEST(SkipList, MatchesStdMapUnderRandomInserts) {
  SkipList<int, int> list(42);
  std::map<int, int> shadow;
  std::mt19937 rng(3);
  for (int i = 0; i < 5000; ++i) {
    const int k = static_cast<int>(rng() % 700);
    list.get_or_insert(k) += 1;
    shadow[k] += 1;
  }
  ASSERT_EQ(list.size(), shadow.size());
  auto it = list.begin();
  for (const auto& [k, v] : shadow) {
    ASSERT_NE(it, list.end());
    EXPECT_EQ(it.key(), k);
    EXPECT_EQ(it.value(), v);
    ++it;
  }
  EXPECT_EQ(it, list.end());
  EXPECT_EQ(list.find(701), nullptr);
}

TEST(MemTable, FrozenTableRejectsInserts) {
  MemTable t(1);
  t.insert(int_key(1), StoredTuple{"a", 1, 0});
  t.freeze();
  EXPECT_THROW(t.insert(int_key(1), StoredTuple{"b", 2, 0}), std::logic_error);
  ASSERT_NE(t.find(int_key(1)), nullptr);
  EXPECT_EQ(t.find(int_key(1))->size(), 1u);
}

TEST(MemTable, KeysIterateInByteOrder) {
  MemTable t(1);
  for (std::int64_t k : {5, -3, 9, 0, -100}) t.insert(int_key(k), StoredTuple{"", static_cast<std::uint64_t>(k + 200), 0});
  std::vector<JoinKey> keys;
  for (auto it = t.begin(); it != t.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(t.entry_count(), 5u);
}

TEST(Bloom, NoFalseNegativesAndBoundedFalsePositives) {
  BloomFilter bloom(1000, 10, 7);
  for (int i = 0; i < 1000; ++i) bloom.add(int_key(i).bytes);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(bloom.may_contain(int_key(i).bytes));

  int fp = 0;
  for (int i = 0; i < 10000; ++i) fp += bloom.may_contain(int_key(1'000'000 + i).bytes) ? 1 : 0;
  const double rate = fp / 10000.0;
  EXPECT_LE(rate, 2 * BloomFilter::theoretical_fp_rate(10, 7)) << "observed " << rate;
}

TEST(Bloom, EncodeDecodeKeepsAnswers) {
  BloomFilter bloom(50, 10, 7);
  for (int i = 0; i < 50; ++i) bloom.add(int_key(i).bytes);
  const auto decoded = BloomFilter::decode(bloom.encode());
  EXPECT_EQ(decoded.bit_len(), bloom.bit_len());
  EXPECT_EQ(decoded.hash_count(), 7u);
  for (int i = 0; i < 500; ++i) EXPECT_EQ(decoded.may_contain(int_key(i).bytes), bloom.may_contain(int_key(i).bytes));
}

TEST(Bloom, TheoreticalRateForDefaults) {
  // 10 bits/key, 7 hashes: (1 - e^-0.7)^7 ~= 0.0082
  EXPECT_NEAR(BloomFilter::theoretical_fp_rate(10, 7), 0.00819, 0.0001);
}

std::shared_ptr<const DataBlock> block_of(const std::string& key) {
  auto b = std::make_shared<DataBlock>();
  b->records.push_back(BlockRecord{key, {}});
  return b;
}

TEST(BlockCache, EvictsLeastRecentlyUsedWithinBudget) {
  BlockCache cache(300);
  cache.insert({1, 0}, block_of("a"), 100);
  cache.insert({1, 100}, block_of("b"), 100);
  cache.insert({1, 200}, block_of("c"), 100);
  ASSERT_NE(cache.lookup({1, 0}), nullptr);  // a becomes most recent
  cache.insert({2, 0}, block_of("d"), 100);
  EXPECT_LE(cache.usage(), cache.capacity());
  EXPECT_EQ(cache.lookup({1, 100}), nullptr);  // b was least recent
  EXPECT_NE(cache.lookup({1, 0}), nullptr);
  EXPECT_NE(cache.lookup({1, 200}), nullptr);
  EXPECT_NE(cache.lookup({2, 0}), nullptr);
}

TEST(BlockCache, ZeroCapacityCachesNothing) {
  BlockCache cache(0);
  cache.insert({1, 0}, block_of("a"), 10);
  EXPECT_EQ(cache.lookup({1, 0}), nullptr);
  EXPECT_EQ(cache.usage(), 0u);
}

TEST(BlockCache, EraseFileDropsItsBlocks) {
  BlockCache cache(1000);
  cache.insert({1, 0}, block_of("a"), 10);
  cache.insert({2, 0}, block_of("b"), 10);
  cache.erase_file(1);
  EXPECT_EQ(cache.lookup({1, 0}), nullptr);
  EXPECT_NE(cache.lookup({2, 0}), nullptr);
  EXPECT_EQ(cache.usage(), 10u);
}

TEST(Sst, WriteThenReadBack) {
  TempDir dir;
  const auto path = dir / "L0-1.sst";
  std::map<JoinKey, std::vector<StoredTuple>> data;
  std::uint64_t seq = 1;
  for (int k = 0; k < 300; ++k) {
    for (int j = 0; j < 1 + k % 3; ++j) data[int_key(k * 2)].push_back({std::string(20, 'a' + j), seq++, 5});
  }
  {
    SstBuilder b(path, 0, SstOptions{256, 10, 7});
    for (const auto& [k, v] : data) b.add(k.bytes, v);
    b.finish();
  }
  SstReader r(path, 1);
  EXPECT_EQ(r.min_key(), int_key(0).bytes);
  EXPECT_EQ(r.max_key(), int_key(598).bytes);
  EXPECT_GT(r.block_index().size(), 1u);

  // Sortedness across blocks; index last_keys match block contents.
  std::string prev;
  std::size_t records = 0;
  for (std::size_t i = 0; i < r.block_index().size(); ++i) {
    const auto blk = r.read_block(i);
    for (const auto& rec : blk.records) {
      EXPECT_TRUE(records == 0 || prev < rec.key);
      prev = rec.key;
      ++records;
      EXPECT_TRUE(r.may_contain(rec.key));
      EXPECT_EQ(rec.tuples, data.at(JoinKey{rec.key}));
    }
    EXPECT_EQ(blk.records.back().key, r.block_index()[i].last_key);
  }
  EXPECT_EQ(records, data.size());

  EXPECT_FALSE(r.block_for(int_key(-1).bytes).has_value());
  EXPECT_FALSE(r.block_for(int_key(599).bytes).has_value());
  const auto blk = r.block_for(int_key(100).bytes);
  ASSERT_TRUE(blk.has_value());
  EXPECT_NE(r.read_block(*blk).find(int_key(100).bytes), nullptr);
}

TEST(Sst, FooterLayoutIsBitExact) {
  TempDir dir;
  const auto path = dir / "L3-9.sst";
  {
    SstBuilder b(path, 3, SstOptions{});
    b.add("k", {StoredTuple{"p", 1, 2}});
    b.finish();
  }
  const auto bytes = testing::read_file(path);
  ASSERT_GE(bytes.size(), kFooterBytes);
  ByteReader footer(std::string_view(bytes).substr(bytes.size() - kFooterBytes));
  const auto index_offset = footer.u64();
  const auto index_len = footer.u32();
  const auto bloom_offset = footer.u64();
  const auto bloom_len = footer.u32();
  EXPECT_EQ(footer.u32(), 3u);  // level
  EXPECT_EQ(footer.u32(), 1u);  // version
  EXPECT_EQ(footer.u64(), 0x554D4A4F494E5353ULL);
  EXPECT_EQ(bloom_offset, index_offset + index_len);
  EXPECT_EQ(bloom_offset + bloom_len + kFooterBytes, bytes.size());

  // Single data block: key_len, key, count, seq, ts, payload_len, payload, crc.
  ByteReader data(bytes);
  EXPECT_EQ(data.u32(), 1u);
  EXPECT_EQ(data.bytes(1), "k");
  EXPECT_EQ(data.u32(), 1u);
  EXPECT_EQ(data.u64(), 1u);
  EXPECT_EQ(data.u64(), 2u);
  EXPECT_EQ(data.u32(), 1u);
  EXPECT_EQ(data.bytes(1), "p");
  EXPECT_EQ(data.u32(), crc32(std::string_view(bytes).substr(0, data.position())));
  EXPECT_EQ(data.position(), index_offset);
}

TEST(Sst, CorruptBlockNamesTheFile) {
  TempDir dir;
  const auto path = dir / "L0-1.sst";
  {
    SstBuilder b(path, 0, SstOptions{64, 10, 7});
    for (int k = 0; k < 50; ++k) b.add(int_key(k).bytes, {StoredTuple{"payload", static_cast<std::uint64_t>(k + 1), 0}});
    b.finish();
  }
  SstReader r(path, 1);
  // Flip one byte inside the second data block.
  {
    auto bytes = testing::read_file(path);
    bytes[r.block_index()[1].offset + 6] ^= 0x5a;
    FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
  }
  try {
    (void)r.read_block(1);
    FAIL() << "expected corruption";
  } catch (const CorruptionError& e) {
    EXPECT_EQ(e.file(), path.string());
  }
}

TEST(Sst, UnfinishedBuilderLeavesNoFile) {
  TempDir dir;
  const auto path = dir / "L0-1.sst";
  {
    SstBuilder b(path, 0, SstOptions{});
    b.add("a", {StoredTuple{"x", 1, 0}});
  }
  EXPECT_FALSE(std::filesystem::exists(path));
  EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
}

}  // namespace
}  // namespace umjoin::lsm
