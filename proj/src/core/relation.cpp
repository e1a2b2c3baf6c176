#include "umjoin/core/relation.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

namespace umjoin {

namespace {

std::vector<std::size_t> column_order(const Relation& r) {
  std::vector<std::size_t> order(r.columns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.columns[a].name < r.columns[b].name; });
  return order;
}

}  // namespace

std::string render_value(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return nlohmann::json(std::get<std::string>(v)).dump();
}

std::vector<std::string> canonical_columns(const Relation& r) {
  std::vector<std::string> out;
  for (auto i : column_order(r)) out.push_back(r.columns[i].name);
  return out;
}

std::vector<std::string> canonical_lines(const Relation& r) {
  const auto order = column_order(r);
  std::vector<std::string> lines;
  lines.reserve(r.rows.size());
  std::vector<std::string> cells;
  for (const auto& row : r.rows) {
    cells.clear();
    for (auto i : order) cells.push_back(render_value(row.at(i)));
    // Equally named columns are interchangeable; sort their values.
    for (std::size_t b = 0; b < order.size();) {
      std::size_t e = b + 1;
      while (e < order.size() && r.columns[order[e]].name == r.columns[order[b]].name) ++e;
      if (e - b > 1) std::sort(cells.begin() + b, cells.begin() + e);
      b = e;
    }
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) line += ',';
      line += cells[c];
    }
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::string render_canonical(const Relation& r) {
  std::string out = "#";
  const auto cols = canonical_columns(r);
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c == 0 ? " " : ",") + cols[c];
  out += '\n';
  for (const auto& line : canonical_lines(r)) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace umjoin
