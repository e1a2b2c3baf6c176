#include "umjoin/plan/plan.hpp"

#include <deque>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "umjoin/core/error.hpp"

namespace umjoin::plan {

using nlohmann::json;

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kScan: return "scan";
    case NodeKind::kHash: return "hash";
    case NodeKind::kJoin: return "join";
    case NodeKind::kProject: return "project";
    case NodeKind::kMultiJoin: return "multijoin";
  }
  return "?";
}

std::optional<NodeKind> parse_kind(std::string_view text) {
  for (auto k : {NodeKind::kScan, NodeKind::kHash, NodeKind::kJoin, NodeKind::kProject, NodeKind::kMultiJoin}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view alias_of(std::string_view qualified_field) {
  const auto dot = qualified_field.find('.');
  if (dot == std::string_view::npos) return {};
  return qualified_field.substr(0, dot);
}

Plan::Plan(const Plan& other) { *this = other; }

Plan& Plan::operator=(const Plan& other) {
  if (this == &other) return *this;
  nodes_.clear();
  root_ = nullptr;
  std::unordered_map<const PlanNode*, PlanNode*> remap;
  for (const auto& n : other.nodes_) {
    auto copy = std::make_unique<PlanNode>(*n);
    remap[n.get()] = copy.get();
    nodes_.push_back(std::move(copy));
  }
  for (auto& n : nodes_) {
    for (auto& in : n->inputs) in = remap.at(in);
  }
  if (other.root_ != nullptr) root_ = remap.at(other.root_);
  return *this;
}

PlanNode* Plan::add(PlanNode node) {
  nodes_.push_back(std::make_unique<PlanNode>(std::move(node)));
  return nodes_.back().get();
}

PlanNode* Plan::find(std::string_view id) const {
  for (const auto& n : nodes_) {
    if (n->id == id) return n.get();
  }
  return nullptr;
}

std::vector<PlanNode*> get_ordered_nodes(PlanNode* root) {
  std::vector<PlanNode*> order;
  if (root == nullptr) return order;
  std::unordered_set<const PlanNode*> seen{root};
  std::deque<PlanNode*> queue{root};
  while (!queue.empty()) {
    PlanNode* n = queue.front();
    queue.pop_front();
    order.push_back(n);
    for (PlanNode* in : n->inputs) {
      if (seen.insert(in).second) queue.push_back(in);
    }
  }
  return order;
}

std::map<const PlanNode*, std::vector<PlanNode*>> derive_outputs(PlanNode* root) {
  std::map<const PlanNode*, std::vector<PlanNode*>> outputs;
  for (PlanNode* n : get_ordered_nodes(root)) {
    outputs.try_emplace(n);
    for (PlanNode* in : n->inputs) outputs[in].push_back(n);
  }
  return outputs;
}

std::set<std::string> reachable_aliases(const PlanNode* node) {
  std::set<std::string> out;
  for (PlanNode* n : get_ordered_nodes(const_cast<PlanNode*>(node))) {
    if (n->is(NodeKind::kScan)) out.insert(n->alias);
  }
  return out;
}

namespace {

void check_cycles(const PlanNode* root) {
  enum class Mark { kOpen, kDone };
  std::unordered_map<const PlanNode*, Mark> marks;
  // Iterative DFS; a grey node reached again is a back edge.
  struct Frame {
    const PlanNode* node;
    std::size_t next;
  };
  std::vector<Frame> stack{{root, 0}};
  marks[root] = Mark::kOpen;
  while (!stack.empty()) {
    auto& f = stack.back();
    if (f.next == f.node->inputs.size()) {
      marks[f.node] = Mark::kDone;
      stack.pop_back();
      continue;
    }
    const PlanNode* in = f.node->inputs[f.next++];
    auto it = marks.find(in);
    if (it == marks.end()) {
      marks[in] = Mark::kOpen;
      stack.push_back({in, 0});
    } else if (it->second == Mark::kOpen) {
      throw PlanError(f.node->id, "cycle through back edge " + f.node->id + " -> " + in->id);
    }
  }
}

void check_field(const PlanNode& node, const PlanNode& input, std::string_view field,
                 std::unordered_map<const PlanNode*, std::set<std::string>>& alias_cache) {
  const auto alias = alias_of(field);
  if (alias.empty()) throw PlanError(node.id, "column '" + std::string(field) + "' is not qualified as alias.field");
  auto it = alias_cache.find(&input);
  if (it == alias_cache.end()) it = alias_cache.emplace(&input, reachable_aliases(&input)).first;
  if (!it->second.contains(std::string(alias))) {
    throw PlanError(node.id, "column '" + std::string(field) + "' does not come from input '" + input.id + "'");
  }
}

}  // namespace

void Plan::validate() const {
  if (root_ == nullptr) throw PlanError("", "plan has no root");
  check_cycles(root_);
  const auto reachable = get_ordered_nodes(root_);

  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, const PlanNode*> aliases;
  std::unordered_map<const PlanNode*, std::set<std::string>> alias_cache;
  for (const PlanNode* n : reachable) {
    if (n->id.empty()) throw PlanError("", "node with empty id");
    if (!ids.insert(n->id).second) throw PlanError(n->id, "duplicate node id");

    const std::size_t arity = n->inputs.size();
    switch (n->kind) {
      case NodeKind::kScan:
        if (arity != 0) throw PlanError(n->id, "scan takes no inputs");
        if (n->table.empty()) throw PlanError(n->id, "scan without table");
        if (auto [it, fresh] = aliases.emplace(n->alias, n); !fresh && it->second != n) {
          throw PlanError(n->id, "duplicate scan alias '" + n->alias + "'");
        }
        break;
      case NodeKind::kHash:
        if (arity != 1) throw PlanError(n->id, "hash takes exactly one input");
        break;
      case NodeKind::kProject:
        if (arity != 1) throw PlanError(n->id, "project takes exactly one input");
        if (n->columns.empty()) throw PlanError(n->id, "project without columns");
        for (const auto& c : n->columns) check_field(*n, *n->inputs[0], c, alias_cache);
        break;
      case NodeKind::kJoin:
      case NodeKind::kMultiJoin: {
        if (n->is(NodeKind::kJoin) && arity != 2) throw PlanError(n->id, "join takes exactly two inputs");
        if (n->is(NodeKind::kMultiJoin) && arity < 2) throw PlanError(n->id, "multijoin takes at least two inputs");
        if (n->join_keys.empty()) throw PlanError(n->id, "join without equi-condition");
        for (const auto& c : n->join_keys) {
          for (const auto* ref : {&c.left, &c.right}) {
            if (ref->input >= arity) {
              throw PlanError(n->id, "join key ordinal " + std::to_string(ref->input) + " out of range");
            }
            check_field(*n, *n->inputs[ref->input], ref->field, alias_cache);
          }
          if (c.left.input == c.right.input) throw PlanError(n->id, "equi-condition within a single input");
        }
        for (const auto& o : n->output) {
          if (o.input >= arity) throw PlanError(n->id, "output ordinal out of range");
          if (o.field != "*") check_field(*n, *n->inputs[o.input], o.field, alias_cache);
        }
        break;
      }
    }
    if (!n->is(NodeKind::kMultiJoin) && !n->output.empty()) throw PlanError(n->id, "output list on a non-multijoin node");
  }
}

void Plan::prune() {
  const auto reachable = get_ordered_nodes(root_);
  std::unordered_set<const PlanNode*> keep(reachable.begin(), reachable.end());
  std::erase_if(nodes_, [&](const std::unique_ptr<PlanNode>& n) { return !keep.contains(n.get()); });
}

Plan parse_plan(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PlanError("", std::string("invalid plan json: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("root") || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw PlanError("", "plan json needs 'root' and a 'nodes' array");
  }

  Plan plan;
  std::unordered_map<std::string, PlanNode*> by_id;
  std::vector<std::pair<PlanNode*, std::vector<std::string>>> pending_inputs;
  try {
    for (const auto& jn : doc["nodes"]) {
      PlanNode node;
      node.id = jn.at("id").get<std::string>();
      const auto kind_text = jn.at("kind").get<std::string>();
      const auto kind = parse_kind(kind_text);
      if (!kind) throw PlanError(node.id, "unknown node kind '" + kind_text + "'");
      node.kind = *kind;
      if (jn.contains("table")) node.table = jn["table"].get<std::string>();
      node.alias = jn.contains("alias") ? jn["alias"].get<std::string>() : node.table;
      if (jn.contains("columns")) node.columns = jn["columns"].get<std::vector<std::string>>();
      if (jn.contains("join_keys")) {
        const auto& keys = jn["join_keys"];
        if (!keys.is_array() || keys.size() % 2 != 0) {
          throw PlanError(node.id, "join_keys must hold an even number of [ordinal, field] entries");
        }
        for (std::size_t i = 0; i < keys.size(); i += 2) {
          EquiCondition c;
          c.left = ColumnRef{keys[i].at(0).get<std::size_t>(), keys[i].at(1).get<std::string>()};
          c.right = ColumnRef{keys[i + 1].at(0).get<std::size_t>(), keys[i + 1].at(1).get<std::string>()};
          node.join_keys.push_back(std::move(c));
        }
      }
      if (jn.contains("output")) {
        for (const auto& o : jn["output"]) node.output.push_back({o.at(0).get<std::size_t>(), o.at(1).get<std::string>()});
      }
      auto inputs = jn.value("inputs", std::vector<std::string>{});
      const std::string id = node.id;
      if (by_id.contains(id)) throw PlanError(id, "duplicate node id");
      PlanNode* added = plan.add(std::move(node));
      by_id[id] = added;
      pending_inputs.emplace_back(added, std::move(inputs));
    }
    for (auto& [node, inputs] : pending_inputs) {
      for (const auto& in : inputs) {
        auto it = by_id.find(in);
        if (it == by_id.end()) throw PlanError(node->id, "dangling input '" + in + "'");
        node->inputs.push_back(it->second);
      }
    }
    const auto root_id = doc["root"].get<std::string>();
    auto it = by_id.find(root_id);
    if (it == by_id.end()) throw PlanError(root_id, "root node not found");
    plan.set_root(it->second);
  } catch (const json::exception& e) {
    throw PlanError("", std::string("malformed plan node: ") + e.what());
  }

  plan.validate();
  const auto reach = get_ordered_nodes(plan.root());
  const std::unordered_set<const PlanNode*> reachable(reach.begin(), reach.end());
  for (const auto& n : plan.arena()) {
    if (!reachable.contains(n.get())) throw PlanError(n->id, "node is not reachable from the root");
  }
  return plan;
}

std::string serialize_plan(const Plan& plan) {
  json nodes = json::array();
  for (const PlanNode* n : get_ordered_nodes(plan.root())) {
    json jn;
    jn["id"] = n->id;
    jn["kind"] = std::string(to_string(n->kind));
    if (n->is(NodeKind::kScan)) {
      jn["table"] = n->table;
      if (n->alias != n->table) jn["alias"] = n->alias;
    }
    if (!n->join_keys.empty()) {
      json keys = json::array();
      for (const auto& c : n->join_keys) {
        keys.push_back(json::array({c.left.input, c.left.field}));
        keys.push_back(json::array({c.right.input, c.right.field}));
      }
      jn["join_keys"] = std::move(keys);
    }
    if (!n->columns.empty()) jn["columns"] = n->columns;
    if (!n->output.empty()) {
      json out = json::array();
      for (const auto& o : n->output) out.push_back(json::array({o.input, o.field}));
      jn["output"] = std::move(out);
    }
    json inputs = json::array();
    for (const PlanNode* in : n->inputs) inputs.push_back(in->id);
    jn["inputs"] = std::move(inputs);
    nodes.push_back(std::move(jn));
  }
  json doc;
  doc["root"] = plan.root() != nullptr ? plan.root()->id : "";
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

bool isomorphic(const Plan& a, const Plan& b) {
  const auto na = get_ordered_nodes(a.root());
  const auto nb = get_ordered_nodes(b.root());
  if (na.size() != nb.size()) return false;
  std::unordered_map<std::string, const PlanNode*> by_id;
  for (const PlanNode* n : nb) by_id[n->id] = n;
  if (a.root() == nullptr || b.root() == nullptr) return a.root() == b.root();
  if (a.root()->id != b.root()->id) return false;
  for (const PlanNode* x : na) {
    auto it = by_id.find(x->id);
    if (it == by_id.end()) return false;
    const PlanNode* y = it->second;
    if (x->kind != y->kind || x->table != y->table || x->alias != y->alias || x->join_keys != y->join_keys ||
        x->columns != y->columns || x->output != y->output || x->inputs.size() != y->inputs.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x->inputs.size(); ++i) {
      if (x->inputs[i]->id != y->inputs[i]->id) return false;
    }
  }
  return true;
}

}  // namespace umjoin::plan
