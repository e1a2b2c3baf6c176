#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "umjoin/core/codec.hpp"
#include "umjoin/core/value.hpp"
#include "umjoin/engine/state_store.hpp"

namespace umjoin::engine {

struct StreamDef {
  std::size_t stream_index = 0;
  std::string name;
  Schema schema;
  std::vector<std::string> key_fields;
};

// Positions of the key fields in the schema. Throws ConfigError for unknown or
// missing key fields.
std::vector<std::size_t> key_positions(const StreamDef& stream);

// Throws RejectedEventError when the tuple does not carry every key field.
JoinKey extract_key(const Row& tuple, std::span<const std::size_t> positions);

struct InputEvent {
  std::size_t stream_index = 0;
  Row tuple;
  std::uint64_t ts = 0;
};

struct Component {
  std::size_t stream_index = 0;
  std::uint64_t seq = 0;
  std::string payload;  // encoded row
};

// One component per input stream, in stream order.
struct JoinedRow {
  std::vector<Component> components;
};

// Output of one event in factorized form: the new tuple times the probe result
// of every other stream.
struct JoinResult {
  std::size_t stream = 0;
  lsm::StoredTuple tuple;
  std::vector<std::vector<lsm::StoredTuple>> probes;  // per stream; own slot unused
  bool matched = false;

  std::uint64_t row_count() const;

  // Calls f(std::span<const lsm::StoredTuple* const>) once per output row.
  template <class F>
  void for_each_row(F&& f) const {
    if (!matched) return;
    const std::size_t n = probes.size();
    std::vector<std::size_t> pos(n, 0);
    std::vector<const lsm::StoredTuple*> row(n);
    for (;;) {
      for (std::size_t s = 0; s < n; ++s) row[s] = s == stream ? &tuple : &probes[s][pos[s]];
      f(std::span<const lsm::StoredTuple* const>(row));
      std::size_t s = n;
      for (;;) {
        if (s == 0) return;
        --s;
        if (s == stream) continue;
        if (++pos[s] < probes[s].size()) break;
        pos[s] = 0;
      }
    }
  }

  std::vector<JoinedRow> rows() const;
};

// Multi-way streaming equi-join over one state store per input stream. Each
// event is inserted into its own store, then the other stores are probed in
// ascending stream order; the first empty probe ends the event with no output.
class UMJoinOperator {
 public:
  UMJoinOperator(std::vector<StreamDef> streams, std::vector<std::unique_ptr<StateStore>> stores,
                 bool short_circuit = true);

  JoinResult process(const InputEvent& event);
  // Same, for a caller that already holds the key and encoded payload.
  JoinResult process_encoded(std::size_t stream, const JoinKey& key, std::string payload, std::uint64_t ts);

  std::size_t arity() const { return streams_.size(); }
  const StreamDef& stream(std::size_t i) const { return streams_.at(i); }
  StateStore& store(std::size_t i) { return *stores_.at(i); }
  const StateStore& store(std::size_t i) const { return *stores_.at(i); }
  // Streams probed by the most recent event, in probe order.
  const std::vector<std::size_t>& last_probe_order() const { return last_probes_; }
  std::uint64_t rejected_events() const { return rejected_; }

 private:
  std::vector<StreamDef> streams_;
  std::vector<std::vector<std::size_t>> key_pos_;
  std::vector<std::unique_ptr<StateStore>> stores_;
  bool short_circuit_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t rejected_ = 0;
  std::vector<std::size_t> last_probes_;
};

}  // namespace umjoin::engine
