#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace umjoin {

enum class FieldType : std::uint8_t { kInt = 1, kString = 2 };

using Value = std::variant<std::int64_t, std::string>;
using Row = std::vector<Value>;

struct Field {
  std::string name;
  FieldType type = FieldType::kString;

  friend bool operator==(const Field&, const Field&) = default;
};

struct Schema {
  std::vector<Field> fields;

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t size() const { return fields.size(); }

  friend bool operator==(const Schema&, const Schema&) = default;
};

FieldType type_of(const Value& v);
std::string to_string(const Value& v);
std::string_view to_string(FieldType t);

// Parses `text` as a value of type `t`; nullopt when it does not fit the type.
std::optional<Value> parse_value(std::string_view text, FieldType t);

}  // namespace umjoin
