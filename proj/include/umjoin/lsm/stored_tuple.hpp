#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace umjoin::lsm {

// One element of the per-key tuple list kept by a backend.
struct StoredTuple {
  std::string payload;
  std::uint64_t seq = 0;  // unique, increasing per backend
  std::uint64_t ts = 0;   // arrival time in ms

  friend bool operator==(const StoredTuple&, const StoredTuple&) = default;
};

inline constexpr std::uint64_t kNoTtl = std::numeric_limits<std::uint64_t>::max();

// ts + ttl < now, without overflowing for an infinite ttl.
inline bool is_expired(const StoredTuple& t, std::uint64_t ttl_ms, std::uint64_t now_ms) {
  if (ttl_ms == kNoTtl) return false;
  if (t.ts > now_ms) return false;
  return now_ms - t.ts > ttl_ms;
}

}  // namespace umjoin::lsm
