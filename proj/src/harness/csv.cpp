#include "umjoin/harness/csv.hpp"

#include <fstream>
#include <sstream>

#include "umjoin/core/error.hpp"

namespace umjoin::harness {

namespace {

// Splits one record starting at `pos`; advances `pos` past its line break.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      break;
    } else if (c == '\r' && pos < text.size() && text[pos] == '\n') {
      // CRLF: the '\n' ends the record next.
    } else {
      field += c;
    }
  }
  if (quoted) throw ConfigError("unterminated quoted field on line " + std::to_string(line_no));
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos && !s.empty()) return s;
  if (s.empty()) return "\"\"";
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Table parse_csv_table(std::string_view text, const std::string& name) {
  Table t;
  t.name = name;
  std::size_t pos = 0;
  std::size_t line_no = 1;
  if (text.empty()) throw ConfigError("table '" + name + "' has no header line");
  for (const auto& h : next_record(text, pos, line_no)) {
    const auto colon = h.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw ConfigError("table '" + name + "': header field '" + h + "' must look like name:int or name:str");
    }
    const auto type_name = h.substr(colon + 1);
    FieldType type;
    if (type_name == "int") {
      type = FieldType::kInt;
    } else if (type_name == "str") {
      type = FieldType::kString;
    } else {
      throw ConfigError("table '" + name + "': unknown field type '" + type_name + "'");
    }
    t.schema.fields.push_back({h.substr(0, colon), type});
  }
  while (pos < text.size()) {
    ++line_no;
    auto fields = next_record(text, pos, line_no);
    if (fields.size() == 1 && fields[0].empty() && t.schema.size() != 1) continue;  // blank line
    Row row;
    for (std::size_t i = 0; i < fields.size() && i < t.schema.size(); ++i) {
      auto v = parse_value(fields[i], t.schema.fields[i].type);
      if (!v) break;
      row.push_back(std::move(*v));
    }
    if (fields.size() != t.schema.size() && row.size() == t.schema.size()) row.pop_back();
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw StorageError("short write to " + path.string());
}

Table read_csv_table(const std::filesystem::path& path, const std::string& name) {
  return parse_csv_table(read_text_file(path), name);
}

std::string format_csv_table(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.schema.size(); ++i) {
    if (i > 0) out += ',';
    out += table.schema.fields[i].name + ":" + std::string(to_string(table.schema.fields[i].type));
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      if (const auto* s = std::get_if<std::string>(&row[i])) {
        out += quote_if_needed(*s);
      } else {
        out += std::to_string(std::get<std::int64_t>(row[i]));
      }
    }
    out += '\n';
  }
  return out;
}

void write_csv_table(const Table& table, const std::filesystem::path& path) {
  write_text_file(path, format_csv_table(table));
}

Catalog load_catalog_for_plan(const std::filesystem::path& dir, const plan::Plan& plan) {
  Catalog c;
  for (const auto* n : plan::get_ordered_nodes(plan.root())) {
    if (!n->is(plan::NodeKind::kScan) || c.contains(n->table)) continue;
    const auto path = dir / (n->table + ".csv");
    if (!std::filesystem::exists(path)) throw ConfigError("missing data file " + path.string());
    c[n->table] = read_csv_table(path, n->table);
  }
  return c;
}

}  // namespace umjoin::harness
