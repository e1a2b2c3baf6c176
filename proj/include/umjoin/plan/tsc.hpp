#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <vector>

#include "umjoin/plan/plan.hpp"

namespace umjoin::plan {

struct PatternConfig {
  // Also treat projections sitting on a join (and hashes above such projections)
  // as part of the binary-join-tree pattern.
  bool include_project_nodes = false;
};

// A recognized binary-join-tree pattern. The root is a join and is also the
// first member.
struct MultiJoinGroup {
  PlanNode* root = nullptr;
  std::vector<PlanNode*> members;
};

class GroupAssignment {
 public:
  std::size_t create(PlanNode* root);
  void add_member(std::size_t group, PlanNode* node);

  std::optional<std::size_t> group_of(const PlanNode* node) const;
  const MultiJoinGroup& group(std::size_t index) const { return groups_.at(index); }
  const std::vector<MultiJoinGroup>& groups() const { return groups_; }
  bool is_member(std::size_t group, const PlanNode* node) const;

 private:
  std::vector<MultiJoinGroup> groups_;
  std::unordered_map<const PlanNode*, std::size_t> group_of_;
};

bool can_be_multi_join_group_member(const PlanNode& node, const PatternConfig& config = {});

// The group shared by every consumer of `node`; nullopt if `node` has no
// consumers, any consumer is ungrouped, or consumers disagree.
std::optional<std::size_t> can_be_in_same_group_with_outputs(const PlanNode& node,
                                                             const std::vector<PlanNode*>& outputs,
                                                             const GroupAssignment& groups);

// Step one: a single breadth-first pass assigning nodes to groups.
GroupAssignment create_multi_join_groups(PlanNode* root, const PatternConfig& config = {});

using VisitedMap = std::unordered_map<const PlanNode*, PlanNode*>;

// Step two: memoized post-order rewrite replacing each group root by a multijoin
// node. Rewrites inputs of `node` in place; new nodes are added to `plan`.
class MultiJoinRewriter {
 public:
  MultiJoinRewriter(Plan& plan, const GroupAssignment& groups);

  PlanNode* get_multi_join_node(PlanNode* node);
  std::size_t multijoins_created() const { return created_; }
  const VisitedMap& visited() const { return visited_; }

 private:
  PlanNode* create_multi_join_node(const MultiJoinGroup& group, std::size_t group_index);
  std::string next_id();

  Plan& plan_;
  const GroupAssignment& groups_;
  VisitedMap visited_;
  std::size_t created_ = 0;
  std::size_t id_counter_ = 0;
};

struct ConvertResult {
  Plan plan;
  std::size_t groups = 0;
  std::size_t multijoins = 0;
};

// Two-Step-Convert over a copy of `input`; the input plan is not modified.
ConvertResult two_step_convert(const Plan& input, const PatternConfig& config = {});

}  // namespace umjoin::plan
