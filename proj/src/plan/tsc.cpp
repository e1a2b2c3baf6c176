#include "umjoin/plan/tsc.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "umjoin/core/error.hpp"

namespace umjoin::plan {

std::size_t GroupAssignment::create(PlanNode* root) {
  groups_.push_back(MultiJoinGroup{root, {root}});
  group_of_[root] = groups_.size() - 1;
  return groups_.size() - 1;
}

void GroupAssignment::add_member(std::size_t group, PlanNode* node) {
  groups_.at(group).members.push_back(node);
  group_of_[node] = group;
}

std::optional<std::size_t> GroupAssignment::group_of(const PlanNode* node) const {
  auto it = group_of_.find(node);
  if (it == group_of_.end()) return std::nullopt;
  return it->second;
}

bool GroupAssignment::is_member(std::size_t group, const PlanNode* node) const {
  auto g = group_of(node);
  return g && *g == group;
}

bool can_be_multi_join_group_member(const PlanNode& node, const PatternConfig& config) {
  if (node.is(NodeKind::kJoin)) return true;
  auto over_join = [](const PlanNode& n) { return n.inputs.size() == 1 && n.inputs[0]->is(NodeKind::kJoin); };
  if (node.is(NodeKind::kHash)) {
    if (over_join(node)) return true;
    return config.include_project_nodes && node.inputs.size() == 1 && node.inputs[0]->is(NodeKind::kProject) &&
           over_join(*node.inputs[0]);
  }
  if (node.is(NodeKind::kProject)) return config.include_project_nodes && over_join(node);
  return false;
}

std::optional<std::size_t> can_be_in_same_group_with_outputs(const PlanNode& /*node*/,
                                                             const std::vector<PlanNode*>& outputs,
                                                             const GroupAssignment& groups) {
  if (outputs.empty()) return std::nullopt;
  const auto first = groups.group_of(outputs.front());
  if (!first) return std::nullopt;
  for (const PlanNode* out : outputs) {
    if (groups.group_of(out) != first) return std::nullopt;
  }
  return first;
}

GroupAssignment create_multi_join_groups(PlanNode* root, const PatternConfig& config) {
  GroupAssignment groups;
  const auto outputs = derive_outputs(root);
  for (PlanNode* node : get_ordered_nodes(root)) {
    if (!can_be_multi_join_group_member(*node, config)) continue;
    if (auto g = can_be_in_same_group_with_outputs(*node, outputs.at(node), groups)) {
      groups.add_member(*g, node);
      continue;
    }
    if (node->is(NodeKind::kJoin)) groups.create(node);
  }
  return groups;
}

MultiJoinRewriter::MultiJoinRewriter(Plan& plan, const GroupAssignment& groups) : plan_(plan), groups_(groups) {}

std::string MultiJoinRewriter::next_id() {
  std::string id;
  do {
    id = "multijoin-" + std::to_string(++id_counter_);
  } while (plan_.find(id) != nullptr);
  return id;
}

PlanNode* MultiJoinRewriter::get_multi_join_node(PlanNode* node) {
  if (auto it = visited_.find(node); it != visited_.end()) return it->second;
  for (auto& input : node->inputs) input = get_multi_join_node(input);

  PlanNode* ret = node;
  if (auto g = groups_.group_of(node); g && groups_.group(*g).root == node) {
    ret = create_multi_join_node(groups_.group(*g), *g);
  }
  visited_[node] = ret;
  return ret;
}

namespace {

// One occurrence of a group member along a path from the group root. A member
// shared by several in-group consumers is unfolded once per path so the
// flattened join keeps every occurrence of the subtree it stands for.
struct Instance {
  PlanNode* node = nullptr;
  std::vector<int> child;               // per input slot: child instance, or -1 if external
  std::vector<std::size_t> ordinal;     // per input slot: multijoin ordinal when external
  std::optional<std::vector<std::string>> visible;  // columns still visible above this point
};

}  // namespace

PlanNode* MultiJoinRewriter::create_multi_join_node(const MultiJoinGroup& group, std::size_t group_index) {
  std::vector<Instance> instances;
  std::unordered_map<const PlanNode*, std::vector<int>> instances_of;
  bool has_projection = false;

  auto expand = [&](auto&& self, PlanNode* node, std::optional<std::vector<std::string>> visible) -> int {
    if (node->is(NodeKind::kProject)) {
      has_projection = true;
      std::vector<std::string> cols;
      for (const auto& c : node->columns) {
        if (!visible || std::find(visible->begin(), visible->end(), c) != visible->end()) cols.push_back(c);
      }
      if (visible) {
        // Keep the outer projection's order.
        std::vector<std::string> ordered;
        for (const auto& c : *visible) {
          if (std::find(cols.begin(), cols.end(), c) != cols.end()) ordered.push_back(c);
        }
        cols = std::move(ordered);
      }
      visible = std::move(cols);
    }
    const int index = static_cast<int>(instances.size());
    instances.push_back(Instance{node, {}, std::vector<std::size_t>(node->inputs.size(), 0), visible});
    instances_of[node].push_back(index);
    std::vector<int> child(node->inputs.size(), -1);
    for (std::size_t slot = 0; slot < node->inputs.size(); ++slot) {
      if (groups_.is_member(group_index, node->inputs[slot])) child[slot] = self(self, node->inputs[slot], visible);
    }
    instances[index].child = std::move(child);
    return index;
  };
  expand(expand, group.root, std::nullopt);

  PlanNode multijoin;
  multijoin.id = next_id();
  multijoin.kind = NodeKind::kMultiJoin;

  std::unordered_map<const PlanNode*, std::set<std::string>> alias_cache;
  auto aliases = [&](const PlanNode* n) -> const std::set<std::string>& {
    auto it = alias_cache.find(n);
    if (it == alias_cache.end()) it = alias_cache.emplace(n, reachable_aliases(n)).first;
    return it->second;
  };

  // Inputs in member order, skipping in-group inputs.
  for (PlanNode* member : group.members) {
    for (int idx : instances_of[member]) {
      auto& inst = instances[idx];
      for (std::size_t slot = 0; slot < member->inputs.size(); ++slot) {
        if (inst.child[slot] != -1) continue;
        inst.ordinal[slot] = multijoin.inputs.size();
        PlanNode* external = member->inputs[slot];
        multijoin.inputs.push_back(external);
        if (!has_projection) continue;
        if (!inst.visible) {
          multijoin.output.push_back({inst.ordinal[slot], "*"});
        } else {
          for (const auto& c : *inst.visible) {
            if (aliases(external).contains(std::string(alias_of(c)))) multijoin.output.push_back({inst.ordinal[slot], c});
          }
        }
      }
    }
  }

  // Re-index every member join condition onto the flattened inputs.
  auto resolve = [&](int idx, const ColumnRef& ref) -> ColumnRef {
    std::size_t slot = ref.input;
    const auto alias = std::string(alias_of(ref.field));
    for (;;) {
      const Instance& inst = instances[idx];
      if (inst.child[slot] == -1) return ColumnRef{inst.ordinal[slot], ref.field};
      idx = inst.child[slot];
      const PlanNode* n = instances[idx].node;
      if (!n->is(NodeKind::kJoin)) {
        slot = 0;
        continue;
      }
      const bool in_left = aliases(n->inputs[0]).contains(alias);
      const bool in_right = aliases(n->inputs[1]).contains(alias);
      if (in_left == in_right) {
        throw PlanError(n->id, "cannot attribute column '" + ref.field + "' to exactly one join input");
      }
      slot = in_left ? 0 : 1;
    }
  };
  for (PlanNode* member : group.members) {
    if (!member->is(NodeKind::kJoin)) continue;
    for (int idx : instances_of[member]) {
      for (const auto& c : member->join_keys) multijoin.join_keys.push_back({resolve(idx, c.left), resolve(idx, c.right)});
    }
  }

  ++created_;
  return plan_.add(std::move(multijoin));
}

ConvertResult two_step_convert(const Plan& input, const PatternConfig& config) {
  ConvertResult result{input, 0, 0};
  Plan& plan = result.plan;
  if (plan.root() == nullptr) return result;

  const GroupAssignment groups = create_multi_join_groups(plan.root(), config);
  MultiJoinRewriter rewriter(plan, groups);
  plan.set_root(rewriter.get_multi_join_node(plan.root()));
  plan.prune();
  plan.validate();

  result.groups = groups.groups().size();
  result.multijoins = rewriter.multijoins_created();
  return result;
}

}  // namespace umjoin::plan
