#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "umjoin/core/relation.hpp"
#include "umjoin/plan/plan.hpp"

namespace umjoin::harness {

// CSV with a typed header: `name:int,name:str,...`. Strings are quoted when
// they contain a comma, quote or line break; quotes are doubled.
//
// A data line whose field count or values do not fit the header is kept as a
// truncated row (the fields before the first bad one) so the engine can reject
// and count it.
Table parse_csv_table(std::string_view text, const std::string& name);
Table read_csv_table(const std::filesystem::path& path, const std::string& name);

std::string format_csv_table(const Table& table);
void write_csv_table(const Table& table, const std::filesystem::path& path);

// Loads `<dir>/<table>.csv` for every table scanned by the plan.
Catalog load_catalog_for_plan(const std::filesystem::path& dir, const plan::Plan& plan);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace umjoin::harness
