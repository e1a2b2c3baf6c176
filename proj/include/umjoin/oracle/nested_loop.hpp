#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "umjoin/core/codec.hpp"
#include "umjoin/oracle/multiset.hpp"

namespace umjoin::oracle {

// One tuple as the oracle sees it: the engine's key encoding plus an interned payload id.
struct OracleTuple {
  JoinKey key;
  std::uint32_t id = 0;
};

// Per-stream tuple lists, indexed by stream.
using StreamContents = std::vector<std::vector<OracleTuple>>;

// Full equi-join of all streams on their keys, by nested loops. Rows list one
// component per stream in stream order.
ResultMultiset batch_multi_join(const StreamContents& contents);

// Independent reference: enumerates every combination of one tuple per stream
// and keeps those whose keys all agree. Exponential; small inputs only.
ResultMultiset reference_multi_join(const StreamContents& contents);

// Output increment caused by `increment` arriving on `stream` when the streams
// hold `snapshot` (the increment itself not yet included).
ResultMultiset expected_increment(const StreamContents& snapshot, std::size_t stream,
                                  std::span<const OracleTuple> increment);

}  // namespace umjoin::oracle
