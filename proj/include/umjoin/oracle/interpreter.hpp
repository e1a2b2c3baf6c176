#pragma once

#include "umjoin/core/relation.hpp"
#include "umjoin/plan/plan.hpp"

namespace umjoin::oracle {

// Bottom-up batch evaluation of a plan over `tables`: scan reads the table
// named by the node, hash is the identity, project selects columns, and
// join/multijoin are nested-loop equi-joins. Shared nodes are evaluated once.
// Rows that do not match their table schema are skipped. Throws PlanError for
// a missing table or an unknown or ambiguous column.
Relation interpret_plan(const plan::Plan& plan, const Catalog& tables);

}  // namespace umjoin::oracle
