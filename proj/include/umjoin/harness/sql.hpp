#pragma once

#include <string_view>

#include "umjoin/plan/plan.hpp"

namespace umjoin::harness {

// Parses `SELECT * FROM t1 [AS] a1, t2 a2, ... [WHERE a.x = b.y AND ...]` into
// a left-deep binary join tree in FROM order, with a hash node above every
// join input. Each predicate lands on the join that first brings both of its
// sides together. Node ids: `scan_<alias>`, `hash_<k>`, `join_<k>`.
//
// Throws SqlError with the byte offset of the offending token for anything
// outside this subset: non-equi or literal predicates, OR, unqualified
// columns, single-table filters, and tables not connected by any predicate.
plan::Plan parse_query(std::string_view sql);

}  // namespace umjoin::harness
