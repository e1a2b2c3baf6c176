#include "umjoin/engine/umjoin.hpp"

#include "umjoin/core/error.hpp"

namespace umjoin::engine {

std::vector<std::size_t> key_positions(const StreamDef& stream) {
  if (stream.key_fields.empty()) throw ConfigError("stream '" + stream.name + "' has no key fields");
  std::vector<std::size_t> out;
  for (const auto& f : stream.key_fields) {
    auto i = stream.schema.index_of(f);
    if (!i) throw ConfigError("stream '" + stream.name + "' has no field '" + f + "'");
    out.push_back(*i);
  }
  return out;
}

JoinKey extract_key(const Row& tuple, std::span<const std::size_t> positions) {
  std::vector<Value> key;
  key.reserve(positions.size());
  for (auto p : positions) {
    if (p >= tuple.size()) throw RejectedEventError("tuple is missing key field " + std::to_string(p));
    key.push_back(tuple[p]);
  }
  return encode_key(key);
}

std::uint64_t JoinResult::row_count() const {
  if (!matched) return 0;
  std::uint64_t n = 1;
  for (std::size_t s = 0; s < probes.size(); ++s) {
    if (s != stream) n *= probes[s].size();
  }
  return n;
}

std::vector<JoinedRow> JoinResult::rows() const {
  std::vector<JoinedRow> out;
  for_each_row([&](std::span<const lsm::StoredTuple* const> row) {
    JoinedRow r;
    for (std::size_t s = 0; s < row.size(); ++s) r.components.push_back({s, row[s]->seq, row[s]->payload});
    out.push_back(std::move(r));
  });
  return out;
}

UMJoinOperator::UMJoinOperator(std::vector<StreamDef> streams, std::vector<std::unique_ptr<StateStore>> stores,
                               bool short_circuit)
    : streams_(std::move(streams)), stores_(std::move(stores)), short_circuit_(short_circuit) {
  if (streams_.size() < 2) throw ConfigError("a multi-way join needs at least two streams");
  if (stores_.size() != streams_.size()) throw ConfigError("one state store per stream is required");
  for (std::size_t i = 0; i < streams_.size(); ++i) {
    if (streams_[i].stream_index != i) throw ConfigError("stream indices must be 0..n-1 in order");
    if (!stores_[i]) throw ConfigError("missing state store for stream " + std::to_string(i));
    key_pos_.push_back(key_positions(streams_[i]));
  }
}

JoinResult UMJoinOperator::process(const InputEvent& event) {
  if (event.stream_index >= streams_.size()) throw ConfigError("event for unknown stream");
  JoinKey key;
  try {
    if (event.tuple.size() != streams_[event.stream_index].schema.size()) {
      throw RejectedEventError("tuple has " + std::to_string(event.tuple.size()) + " fields, schema has " +
                               std::to_string(streams_[event.stream_index].schema.size()));
    }
    key = extract_key(event.tuple, key_pos_[event.stream_index]);
  } catch (const RejectedEventError&) {
    ++rejected_;
    throw;
  }
  return process_encoded(event.stream_index, key, encode_row(event.tuple), event.ts);
}

JoinResult UMJoinOperator::process_encoded(std::size_t stream, const JoinKey& key, std::string payload,
                                           std::uint64_t ts) {
  JoinResult result;
  result.stream = stream;
  result.tuple = lsm::StoredTuple{std::move(payload), next_seq_++, ts};
  result.probes.resize(streams_.size());
  last_probes_.clear();

  stores_[stream]->insert(key, result.tuple);

  bool all_found = true;
  for (std::size_t s = 0; s < streams_.size(); ++s) {
    if (s == stream) continue;
    last_probes_.push_back(s);
    result.probes[s] = stores_[s]->probe(key);
    if (result.probes[s].empty()) {
      all_found = false;
      if (short_circuit_) break;
    }
  }
  result.matched = all_found;
  if (!all_found) {
    for (auto& p : result.probes) p.clear();
  }
  return result;
}

}  // namespace umjoin::engine
