#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iterator>
#include <memory>
#include <utility>
#include <vector>

namespace umjoin::lsm {

// Single-writer ordered map with skip-list layout. Keys are unique; the mapped
// value is created on first access and mutated in place afterwards. Level
// selection uses a private xorshift generator so layouts are reproducible.
template <typename Key, typename Value, typename Compare = std::less<Key>>
class SkipList {
  static constexpr int kMaxHeight = 16;

  struct Node {
    template <typename K>
    Node(K&& k, int h) : key(std::forward<K>(k)), height(h) {
      next.fill(nullptr);
    }
    Key key;
    Value value{};
    int height;
    std::array<Node*, kMaxHeight> next;
  };

 public:
  explicit SkipList(std::uint64_t seed = 0x9e3779b97f4a7c15ULL, Compare cmp = Compare())
      : rng_(seed | 1), cmp_(std::move(cmp)) {
    head_.fill(nullptr);
  }

  SkipList(const SkipList&) = delete;
  SkipList& operator=(const SkipList&) = delete;
  SkipList(SkipList&&) noexcept = default;
  SkipList& operator=(SkipList&&) noexcept = default;

  // Returns the value mapped to `key`, inserting a value-initialized one if absent.
  Value& get_or_insert(const Key& key) {
    std::array<Node**, kMaxHeight> prev{};
    Node* found = find_ge(key, &prev);
    if (found != nullptr && !cmp_(key, found->key)) return found->value;

    const int h = random_height();
    if (h > height_) {
      for (int i = height_; i < h; ++i) prev[i] = &head_[i];
      height_ = h;
    }
    nodes_.push_back(std::make_unique<Node>(key, h));
    Node* n = nodes_.back().get();
    for (int i = 0; i < h; ++i) {
      n->next[i] = *prev[i];
      *prev[i] = n;
    }
    return n->value;
  }

  const Value* find(const Key& key) const {
    const Node* n = const_cast<SkipList*>(this)->find_ge(key, nullptr);
    if (n == nullptr || cmp_(key, n->key)) return nullptr;
    return &n->value;
  }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  class const_iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = std::pair<const Key&, const Value&>;
    using difference_type = std::ptrdiff_t;

    const_iterator() = default;
    explicit const_iterator(const Node* n) : node_(n) {}

    const Key& key() const { return node_->key; }
    const Value& value() const { return node_->value; }
    value_type operator*() const { return {node_->key, node_->value}; }
    const_iterator& operator++() {
      node_ = node_->next[0];
      return *this;
    }
    const_iterator operator++(int) {
      auto tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const const_iterator&, const const_iterator&) = default;

   private:
    const Node* node_ = nullptr;
  };

  const_iterator begin() const { return const_iterator(head_[0]); }
  const_iterator end() const { return const_iterator(nullptr); }

 private:
  // First node with key >= `key`; records the link to patch per level when `prev` is set.
  Node* find_ge(const Key& key, std::array<Node**, kMaxHeight>* prev) {
    Node** link_row = head_.data();
    Node* cur = nullptr;
    for (int level = height_ - 1; level >= 0; --level) {
      Node** link = cur == nullptr ? &link_row[level] : &cur->next[level];
      while (*link != nullptr && cmp_((*link)->key, key)) {
        cur = *link;
        link = &cur->next[level];
      }
      if (prev != nullptr) (*prev)[level] = link;
    }
    if (height_ == 0) return nullptr;
    return cur == nullptr ? head_[0] : cur->next[0];
  }

  int random_height() {
    int h = 1;
    // Branching factor 4.
    while (h < kMaxHeight && (next_random() & 3) == 0) ++h;
    return h;
  }

  std::uint64_t next_random() {
    rng_ ^= rng_ << 13;
    rng_ ^= rng_ >> 7;
    rng_ ^= rng_ << 17;
    return rng_;
  }

  std::array<Node*, kMaxHeight> head_;
  int height_ = 0;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::uint64_t rng_;
  Compare cmp_;
};

}  // namespace umjoin::lsm
