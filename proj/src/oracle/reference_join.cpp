#include <stdexcept>

#include "umjoin/oracle/nested_loop.hpp"

namespace umjoin::oracle {

namespace {

void enumerate(const StreamContents& contents, std::size_t depth, std::vector<const OracleTuple*>& chosen,
               ResultMultiset& out) {
  if (depth == contents.size()) {
    for (const auto* t : chosen) {
      if (!(t->key == chosen.front()->key)) return;
    }
    std::vector<std::uint32_t> row;
    row.reserve(chosen.size());
    for (const auto* t : chosen) row.push_back(t->id);
    out.add(row);
    return;
  }
  for (const auto& t : contents[depth]) {
    chosen[depth] = &t;
    enumerate(contents, depth + 1, chosen, out);
  }
}

}  // namespace

ResultMultiset reference_multi_join(const StreamContents& contents) {
  if (contents.size() < 2) throw std::invalid_argument("reference join needs at least two streams");
  ResultMultiset out(contents.size());
  std::vector<const OracleTuple*> chosen(contents.size());
  enumerate(contents, 0, chosen, out);
  return out;
}

}  // namespace umjoin::oracle
