#include "umjoin/oracle/multiset.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace umjoin::oracle {

std::uint32_t PayloadDictionary::intern(std::string_view payload) {
  auto it = ids_.find(std::string(payload));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(payloads_.size());
  payloads_.emplace_back(payload);
  ids_.emplace(payloads_.back(), id);
  return id;
}

namespace {

void radix_sort(std::vector<std::uint64_t>& v, unsigned used_bits) {
  if (v.size() < 2) return;
  if (v.size() < 4096) {
    std::sort(v.begin(), v.end());
    return;
  }
  constexpr unsigned kDigit = 16;
  std::vector<std::uint64_t> tmp(v.size());
  std::vector<std::size_t> count(std::size_t{1} << kDigit);
  for (unsigned shift = 0; shift < used_bits; shift += kDigit) {
    std::fill(count.begin(), count.end(), 0);
    for (auto x : v) ++count[(x >> shift) & 0xffff];
    if (count[(v.front() >> shift) & 0xffff] == v.size()) continue;
    std::size_t sum = 0;
    for (auto& c : count) {
      const auto n = c;
      c = sum;
      sum += n;
    }
    for (auto x : v) tmp[count[(x >> shift) & 0xffff]++] = x;
    v.swap(tmp);
  }
}

}  // namespace

ResultMultiset::ResultMultiset(std::size_t arity)
    : arity_(arity), bits_(arity == 0 || arity > 64 ? 0 : std::min<unsigned>(32, 64 / static_cast<unsigned>(arity))) {
  if (bits_ == 0 && arity_ > 0) widened_ = true;
}

std::size_t ResultMultiset::size() const {
  if (arity_ == 0) return 0;
  return packed() ? packed_.size() : wide_.size() / arity_;
}

bool ResultMultiset::fits(std::span<const std::uint32_t> row) const {
  if (bits_ >= 32) return true;
  const std::uint32_t limit = std::uint32_t{1} << bits_;
  return std::all_of(row.begin(), row.end(), [&](std::uint32_t id) { return id < limit; });
}

std::uint64_t ResultMultiset::pack(std::span<const std::uint32_t> row) const {
  std::uint64_t w = 0;
  for (auto id : row) w = (w << bits_) | id;
  return w;
}

void ResultMultiset::widen() {
  if (widened_) return;
  const std::uint64_t mask = bits_ >= 64 ? ~0ULL : ((std::uint64_t{1} << bits_) - 1);
  wide_.reserve(packed_.size() * arity_);
  for (auto w : packed_) {
    for (std::size_t c = 0; c < arity_; ++c) {
      wide_.push_back(static_cast<std::uint32_t>((w >> (bits_ * (arity_ - 1 - c))) & mask));
    }
  }
  packed_.clear();
  packed_.shrink_to_fit();
  widened_ = true;
}

void ResultMultiset::push_row(std::span<const std::uint32_t> row) {
  if (packed() && !fits(row)) widen();
  if (packed()) {
    packed_.push_back(pack(row));
  } else {
    wide_.insert(wide_.end(), row.begin(), row.end());
  }
  canonical_ = false;
}

void ResultMultiset::add(std::span<const std::uint32_t> row) {
  if (row.size() != arity_) throw std::invalid_argument("row arity mismatch");
  push_row(row);
}

void ResultMultiset::add_product(std::span<const std::vector<std::uint32_t>> lists) {
  if (lists.size() != arity_) throw std::invalid_argument("product arity mismatch");
  if (arity_ == 0) return;
  for (const auto& l : lists) {
    if (l.empty()) return;
  }
  if (packed()) {
    for (const auto& l : lists) {
      if (!fits(l)) {
        widen();
        break;
      }
    }
  }
  std::vector<std::size_t> pos(arity_, 0);
  std::vector<std::uint32_t> row(arity_);
  const auto& last = lists[arity_ - 1];
  canonical_ = false;
  for (;;) {
    for (std::size_t c = 0; c + 1 < arity_; ++c) row[c] = lists[c][pos[c]];
    if (packed()) {
      row[arity_ - 1] = 0;
      const std::uint64_t prefix = pack(row);
      for (auto id : last) packed_.push_back(prefix | id);
    } else {
      for (auto id : last) {
        row[arity_ - 1] = id;
        wide_.insert(wide_.end(), row.begin(), row.end());
      }
    }
    // Odometer over all but the last list.
    std::size_t c = arity_ - 1;
    while (c > 0) {
      --c;
      if (++pos[c] < lists[c].size()) break;
      pos[c] = 0;
      if (c == 0) return;
    }
    if (arity_ == 1) return;
  }
}

void ResultMultiset::append(const ResultMultiset& other) {
  if (other.arity_ != arity_) throw std::invalid_argument("multiset arity mismatch");
  if (other.empty()) return;
  if (packed() && other.packed()) {
    packed_.insert(packed_.end(), other.packed_.begin(), other.packed_.end());
  } else {
    widen();
    if (other.packed()) {
      ResultMultiset copy = other;
      copy.widen();
      wide_.insert(wide_.end(), copy.wide_.begin(), copy.wide_.end());
    } else {
      wide_.insert(wide_.end(), other.wide_.begin(), other.wide_.end());
    }
  }
  canonical_ = false;
}

void ResultMultiset::canonicalize() const {
  if (canonical_) return;
  if (packed()) {
    radix_sort(packed_, bits_ * static_cast<unsigned>(arity_));
  } else {
    const std::size_t n = wide_.size() / arity_;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(wide_.begin() + a * arity_, wide_.begin() + (a + 1) * arity_,
                                          wide_.begin() + b * arity_, wide_.begin() + (b + 1) * arity_);
    });
    std::vector<std::uint32_t> sorted;
    sorted.reserve(wide_.size());
    for (auto i : order) sorted.insert(sorted.end(), wide_.begin() + i * arity_, wide_.begin() + (i + 1) * arity_);
    wide_.swap(sorted);
  }
  canonical_ = true;
}

std::vector<std::uint32_t> ResultMultiset::row(std::size_t index) const {
  std::vector<std::uint32_t> out(arity_);
  if (packed()) {
    const std::uint64_t w = packed_.at(index);
    const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
    for (std::size_t c = 0; c < arity_; ++c) {
      out[c] = static_cast<std::uint32_t>((w >> (bits_ * (arity_ - 1 - c))) & mask);
    }
  } else {
    std::copy_n(wide_.begin() + index * arity_, arity_, out.begin());
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> ResultMultiset::rows() const {
  canonicalize();
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(row(i));
  return out;
}

bool operator==(const ResultMultiset& a, const ResultMultiset& b) {
  if (a.arity_ != b.arity_ || a.size() != b.size()) return false;
  a.canonicalize();
  b.canonicalize();
  if (a.packed() && b.packed()) return a.packed_ == b.packed_;
  if (!a.packed() && !b.packed()) return a.wide_ == b.wide_;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.row(i) != b.row(i)) return false;
  }
  return true;
}

ResultMultiset subtract(const ResultMultiset& a, const ResultMultiset& b, std::size_t* missing) {
  a.canonicalize();
  b.canonicalize();
  ResultMultiset out(a.arity_);
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t miss = 0;
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  while (i < na || j < nb) {
    if (j == nb) {
      out.push_row(a.row(i++));
      continue;
    }
    if (i == na) {
      ++miss;
      ++j;
      continue;
    }
    const auto ra = a.row(i);
    const auto rb = b.row(j);
    if (ra == rb) {
      ++i;
      ++j;
    } else if (ra < rb) {
      out.push_row(ra);
      ++i;
    } else {
      ++miss;
      ++j;
    }
  }
  out.canonical_ = true;
  if (missing != nullptr) *missing = miss;
  return out;
}

}  // namespace umjoin::oracle
