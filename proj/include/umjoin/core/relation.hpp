#pragma once

#include <map>
#include <string>
#include <vector>

#include "umjoin/core/value.hpp"

namespace umjoin {

// A named input table. Field names are unqualified.
struct Table {
  std::string name;
  Schema schema;
  std::vector<Row> rows;
};

using Catalog = std::map<std::string, Table>;

// A bag of rows over qualified columns ("alias.field"). Column names may repeat
// when the same scan is reached along several paths.
struct Relation {
  std::vector<Field> columns;
  std::vector<Row> rows;
};

// Name-canonical form: columns ordered by name, values of equally named columns
// ordered within each row, then rows sorted. Two relations hold the same
// multiset of rows, up to column order, iff their canonical lines are equal.
std::vector<std::string> canonical_columns(const Relation& r);
std::vector<std::string> canonical_lines(const Relation& r);

// Header line plus canonical lines, newline-terminated.
std::string render_canonical(const Relation& r);

// One value as it appears in canonical text: integers in decimal, strings JSON-quoted.
std::string render_value(const Value& v);

}  // namespace umjoin
