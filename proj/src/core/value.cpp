#include "umjoin/core/value.hpp"

#include <charconv>

namespace umjoin {

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == name) return i;
  }
  return std::nullopt;
}

FieldType type_of(const Value& v) {
  return std::holds_alternative<std::int64_t>(v) ? FieldType::kInt : FieldType::kString;
}

std::string to_string(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

std::string_view to_string(FieldType t) { return t == FieldType::kInt ? "int" : "str"; }

std::optional<Value> parse_value(std::string_view text, FieldType t) {
  if (t == FieldType::kString) return Value{std::string(text)};
  std::int64_t out = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return Value{out};
}

}  // namespace umjoin
