#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "umjoin/core/codec.hpp"
#include "umjoin/engine/state_store.hpp"

namespace umjoin::engine {

enum class Side { kLeft = 0, kRight = 1 };

// One matched pair; payloads are the encoded input rows of each side.
struct PairMatch {
  std::string left;
  std::string right;
};

// Two-way incremental equi-join node of a binary join tree: a state store per
// side, insert into the event's side, probe the other.
class BjtNode {
 public:
  BjtNode(std::unique_ptr<StateStore> left, std::unique_ptr<StateStore> right);

  std::vector<PairMatch> process(Side side, const JoinKey& key, std::string payload, std::uint64_t ts);

  StateStore& store(Side side) { return side == Side::kLeft ? *left_ : *right_; }
  const StateStore& store(Side side) const { return side == Side::kLeft ? *left_ : *right_; }
  std::uint64_t emitted() const { return emitted_; }

 private:
  std::unique_ptr<StateStore> left_;
  std::unique_ptr<StateStore> right_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t emitted_ = 0;
};

}  // namespace umjoin::engine
