#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace umjoin::plan {

enum class NodeKind { kScan, kHash, kJoin, kProject, kMultiJoin };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_kind(std::string_view text);

// A column of one input of a join/multijoin. `field` is qualified as "alias.name".
struct ColumnRef {
  std::size_t input = 0;
  std::string field;

  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
  friend auto operator<=>(const ColumnRef&, const ColumnRef&) = default;
};

// left = right. Serialized as two consecutive entries of `join_keys`.
struct EquiCondition {
  ColumnRef left;
  ColumnRef right;

  friend bool operator==(const EquiCondition&, const EquiCondition&) = default;
};

// Multijoin output restriction entry: one column of one input, or "*" for all of them.
struct OutputColumn {
  std::size_t input = 0;
  std::string field;

  friend bool operator==(const OutputColumn&, const OutputColumn&) = default;
};

std::string_view alias_of(std::string_view qualified_field);

struct PlanNode {
  std::string id;
  NodeKind kind = NodeKind::kScan;
  std::string table;                     // scan
  std::string alias;                     // scan; defaults to table
  std::vector<EquiCondition> join_keys;  // join, multijoin
  std::vector<std::string> columns;      // project
  std::vector<OutputColumn> output;      // multijoin; empty = every input column
  std::vector<PlanNode*> inputs;         // non-owning; the Plan owns all nodes

  bool is(NodeKind k) const { return kind == k; }
};

// Rooted DAG of plan nodes. Nodes are owned by the plan and referenced by
// pointer; a node may feed several consumers. Copying deep-clones the graph.
class Plan {
 public:
  Plan() = default;
  Plan(const Plan& other);
  Plan& operator=(const Plan& other);
  Plan(Plan&&) noexcept = default;
  Plan& operator=(Plan&&) noexcept = default;

  PlanNode* add(PlanNode node);
  PlanNode* root() const { return root_; }
  void set_root(PlanNode* root) { root_ = root; }
  PlanNode* find(std::string_view id) const;

  // All nodes ever added, including ones no longer reachable after a rewrite.
  const std::vector<std::unique_ptr<PlanNode>>& arena() const { return nodes_; }

  // Throws PlanError on arity violations, dangling or unresolvable column
  // references, duplicate ids or aliases, cycles, or unreachable-from-root nodes.
  void validate() const;

  // Drops nodes that are not reachable from the root.
  void prune();

 private:
  std::vector<std::unique_ptr<PlanNode>> nodes_;
  PlanNode* root_ = nullptr;
};

// Breadth-first order from `root` toward the leaves; each node once, root first.
std::vector<PlanNode*> get_ordered_nodes(PlanNode* root);

// Consumers of every reachable node, in BFS discovery order of the consumer.
// A consumer that lists a node twice appears twice.
std::map<const PlanNode*, std::vector<PlanNode*>> derive_outputs(PlanNode* root);

// Scan aliases reachable from `node`.
std::set<std::string> reachable_aliases(const PlanNode* node);

// JSON plan text: {"root": id, "nodes": [{"id", "kind", "table"?, "alias"?,
// "join_keys"?: [[ordinal, "field"], ...], "columns"?, "output"?, "inputs": [...]}]}.
// Consecutive join_keys entries pair up into one equi-condition.
Plan parse_plan(std::string_view text);
std::string serialize_plan(const Plan& plan);

// Structural equality up to node identity (ids and fields must match).
bool isomorphic(const Plan& a, const Plan& b);

}  // namespace umjoin::plan
