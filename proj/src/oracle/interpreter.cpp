#include "umjoin/oracle/interpreter.hpp"

#include <algorithm>
#include <unordered_map>

#include "umjoin/core/error.hpp"

namespace umjoin::oracle {

namespace {

using plan::NodeKind;
using plan::PlanNode;

std::vector<std::size_t> columns_named(const Relation& r, const std::string& name) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    if (r.columns[i].name == name) out.push_back(i);
  }
  return out;
}

std::size_t unique_column(const PlanNode& node, const Relation& r, const std::string& name) {
  const auto found = columns_named(r, name);
  if (found.empty()) throw PlanError(node.id, "unknown column '" + name + "'");
  if (found.size() > 1) throw PlanError(node.id, "ambiguous column '" + name + "'");
  return found.front();
}

Relation scan(const PlanNode& node, const Catalog& tables) {
  auto it = tables.find(node.table);
  if (it == tables.end()) throw PlanError(node.id, "no data for table '" + node.table + "'");
  Relation out;
  for (const auto& f : it->second.schema.fields) out.columns.push_back({node.alias + "." + f.name, f.type});
  // Rows that do not fit the schema are dropped, as the engine rejects them.
  for (const auto& row : it->second.rows) {
    if (row.size() != out.columns.size()) continue;
    bool typed = true;
    for (std::size_t i = 0; i < row.size(); ++i) typed = typed && type_of(row[i]) == out.columns[i].type;
    if (typed) out.rows.push_back(row);
  }
  return out;
}

Relation project(const PlanNode& node, const Relation& in) {
  std::vector<std::size_t> keep;
  for (const auto& name : node.columns) {
    const auto found = columns_named(in, name);
    if (found.empty()) throw PlanError(node.id, "unknown column '" + name + "'");
    keep.insert(keep.end(), found.begin(), found.end());
  }
  Relation out;
  for (auto i : keep) out.columns.push_back(in.columns[i]);
  out.rows.reserve(in.rows.size());
  for (const auto& row : in.rows) {
    Row r;
    r.reserve(keep.size());
    for (auto i : keep) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

struct BoundCondition {
  std::size_t left_input;
  std::size_t left_col;
  std::size_t right_input;
  std::size_t right_col;
};

// Inputs in loop order: each next input is the lowest-numbered one sharing a
// condition with those already placed, so conditions prune as early as possible.
std::vector<std::size_t> loop_order(const PlanNode& node, std::size_t n) {
  std::vector<std::size_t> order;
  std::vector<bool> placed(n, false);
  while (order.size() < n) {
    std::size_t next = n;
    for (const auto& c : node.join_keys) {
      for (auto [a, b] : {std::pair{c.left.input, c.right.input}, std::pair{c.right.input, c.left.input}}) {
        if (placed.at(a) && !placed.at(b)) next = std::min(next, b);
      }
    }
    if (next == n) next = static_cast<std::size_t>(std::find(placed.begin(), placed.end(), false) - placed.begin());
    placed[next] = true;
    order.push_back(next);
  }
  return order;
}

// Nested-loop equi-join of any number of inputs. A condition is checked as soon
// as both of its inputs have a row assigned.
Relation nested_join(const PlanNode& node, const std::vector<const Relation*>& inputs) {
  const auto order = loop_order(node, inputs.size());
  std::vector<std::size_t> position(inputs.size());
  for (std::size_t d = 0; d < order.size(); ++d) position[order[d]] = d;
  std::vector<std::vector<BoundCondition>> check_at(inputs.size());
  for (const auto& c : node.join_keys) {
    BoundCondition b{c.left.input, unique_column(node, *inputs.at(c.left.input), c.left.field), c.right.input,
                     unique_column(node, *inputs.at(c.right.input), c.right.field)};
    check_at[std::max(position[b.left_input], position[b.right_input])].push_back(b);
  }

  std::vector<std::pair<std::size_t, std::size_t>> out_cols;  // (input, column)
  if (node.output.empty()) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      for (std::size_t c = 0; c < inputs[i]->columns.size(); ++c) out_cols.emplace_back(i, c);
    }
  } else {
    for (const auto& o : node.output) {
      const Relation& r = *inputs.at(o.input);
      if (o.field == "*") {
        for (std::size_t c = 0; c < r.columns.size(); ++c) out_cols.emplace_back(o.input, c);
        continue;
      }
      const auto found = columns_named(r, o.field);
      if (found.empty()) throw PlanError(node.id, "unknown output column '" + o.field + "'");
      for (auto c : found) out_cols.emplace_back(o.input, c);
    }
  }

  Relation out;
  for (auto [i, c] : out_cols) out.columns.push_back(inputs[i]->columns[c]);

  std::vector<const Row*> chosen(inputs.size());
  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == inputs.size()) {
      Row row;
      row.reserve(out_cols.size());
      for (auto [i, c] : out_cols) row.push_back((*chosen[i])[c]);
      out.rows.push_back(std::move(row));
      return;
    }
    for (const auto& candidate : inputs[order[depth]]->rows) {
      chosen[order[depth]] = &candidate;
      bool ok = true;
      for (const auto& b : check_at[depth]) {
        if (!((*chosen[b.left_input])[b.left_col] == (*chosen[b.right_input])[b.right_col])) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, depth + 1);
    }
  };
  recurse(recurse, 0);
  return out;
}

}  // namespace

Relation interpret_plan(const plan::Plan& p, const Catalog& tables) {
  if (p.root() == nullptr) throw PlanError("", "plan has no root");
  std::unordered_map<const PlanNode*, Relation> done;
  auto eval = [&](auto&& self, const PlanNode* node) -> const Relation& {
    if (auto it = done.find(node); it != done.end()) return it->second;
    std::vector<const Relation*> ins;
    for (const PlanNode* in : node->inputs) ins.push_back(&self(self, in));
    Relation r;
    switch (node->kind) {
      case NodeKind::kScan: r = scan(*node, tables); break;
      case NodeKind::kHash: r = *ins.at(0); break;
      case NodeKind::kProject: r = project(*node, *ins.at(0)); break;
      case NodeKind::kJoin:
      case NodeKind::kMultiJoin: r = nested_join(*node, ins); break;
    }
    return done.emplace(node, std::move(r)).first->second;
  };
  return eval(eval, p.root());
}

}  // namespace umjoin::oracle
