#include "umjoin/engine/bjt.hpp"

#include "umjoin/core/error.hpp"

namespace umjoin::engine {

BjtNode::BjtNode(std::unique_ptr<StateStore> left, std::unique_ptr<StateStore> right)
    : left_(std::move(left)), right_(std::move(right)) {
  if (!left_ || !right_) throw ConfigError("a join node needs two state stores");
}

std::vector<PairMatch> BjtNode::process(Side side, const JoinKey& key, std::string payload, std::uint64_t ts) {
  StateStore& own = store(side);
  StateStore& other = store(side == Side::kLeft ? Side::kRight : Side::kLeft);
  own.insert(key, lsm::StoredTuple{payload, next_seq_++, ts});
  std::vector<PairMatch> out;
  for (auto& t : other.probe(key)) {
    if (side == Side::kLeft) {
      out.push_back({payload, std::move(t.payload)});
    } else {
      out.push_back({std::move(t.payload), payload});
    }
  }
  emitted_ += out.size();
  return out;
}

}  // namespace umjoin::engine
