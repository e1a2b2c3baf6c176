#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace umjoin::oracle {

// Interns tuple payloads so result rows can be held as small integer ids.
// Identical payloads share one id, which gives multiset semantics on content.
class PayloadDictionary {
 public:
  std::uint32_t intern(std::string_view payload);
  const std::string& payload(std::uint32_t id) const { return payloads_.at(id); }
  std::size_t size() const { return payloads_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> payloads_;
};

// Multiset of fixed-arity rows of payload ids; component i belongs to stream i.
// Rows are packed into one 64-bit word while the ids fit, and fall back to a
// flat id array otherwise. Comparison is order-insensitive and
// multiplicity-sensitive.
class ResultMultiset {
 public:
  explicit ResultMultiset(std::size_t arity = 0);

  std::size_t arity() const { return arity_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  void add(std::span<const std::uint32_t> row);
  // Adds the cross product of the lists, one list per stream.
  void add_product(std::span<const std::vector<std::uint32_t>> lists);
  void append(const ResultMultiset& other);

  // Sorts rows into the canonical order. Cheap when already canonical.
  void canonicalize() const;

  std::vector<std::uint32_t> row(std::size_t index) const;
  std::vector<std::vector<std::uint32_t>> rows() const;

  // Multiset difference a - b. Rows of b missing from a are counted in `*missing`.
  friend ResultMultiset subtract(const ResultMultiset& a, const ResultMultiset& b, std::size_t* missing);
  friend bool operator==(const ResultMultiset& a, const ResultMultiset& b);

 private:
  bool packed() const { return wide_.empty() && !widened_; }
  void widen();
  std::uint64_t pack(std::span<const std::uint32_t> row) const;
  bool fits(std::span<const std::uint32_t> row) const;
  void push_row(std::span<const std::uint32_t> row);

  std::size_t arity_;
  unsigned bits_;  // bits per component while packed
  bool widened_ = false;
  mutable bool canonical_ = true;
  mutable std::vector<std::uint64_t> packed_;
  mutable std::vector<std::uint32_t> wide_;
};

}  // namespace umjoin::oracle
