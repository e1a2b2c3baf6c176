#include "umjoin/oracle/nested_loop.hpp"

#include <stdexcept>

namespace umjoin::oracle {

namespace {

// Every stream except `skip` filtered down to `key`, by linear scan.
bool matches_for(const StreamContents& contents, std::size_t skip, const JoinKey& key,
                 std::vector<std::vector<std::uint32_t>>& lists) {
  for (std::size_t s = 0; s < contents.size(); ++s) {
    if (s == skip) continue;
    auto& list = lists[s];
    list.clear();
    for (const auto& t : contents[s]) {
      if (t.key == key) list.push_back(t.id);
    }
    if (list.empty()) return false;
  }
  return true;
}

}  // namespace

ResultMultiset batch_multi_join(const StreamContents& contents) {
  if (contents.size() < 2) throw std::invalid_argument("batch join needs at least two streams");
  ResultMultiset out(contents.size());
  std::vector<std::vector<std::uint32_t>> lists(contents.size());
  for (const auto& anchor : contents[0]) {
    if (!matches_for(contents, 0, anchor.key, lists)) continue;
    lists[0] = {anchor.id};
    out.add_product(lists);
  }
  return out;
}

ResultMultiset expected_increment(const StreamContents& snapshot, std::size_t stream,
                                  std::span<const OracleTuple> increment) {
  if (stream >= snapshot.size()) throw std::out_of_range("increment stream out of range");
  ResultMultiset out(snapshot.size());
  std::vector<std::vector<std::uint32_t>> lists(snapshot.size());
  for (const auto& t : increment) {
    if (!matches_for(snapshot, stream, t.key, lists)) continue;
    lists[stream] = {t.id};
    out.add_product(lists);
  }
  return out;
}

}  // namespace umjoin::oracle
