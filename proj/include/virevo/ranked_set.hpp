#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <functional>
#include <iterator>
#include <stdexcept>
#include <vector>

namespace virevo {

/// Sorted multiset with rank access, stored as a list of sorted blocks.
///
/// Insert, erase-by-rank and select-by-rank cost O(B + n/B) with block
/// size B; min and max are O(1). For the population sizes this project
/// simulates (up to ~10^6 elements) the block layout beats node-based
/// order-statistic trees by a wide margin because every operation is a
/// short memmove plus a linear scan over block sizes.
template <class T, class Less = std::less<T>>
class RankedSet {
 public:
  static constexpr std::size_t kBlock = 128;

  class const_iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = T;
    using difference_type = std::ptrdiff_t;
    using pointer = const T*;
    using reference = const T&;

    const_iterator() = default;
    reference operator*() const { return (*blocks_)[block_][pos_]; }
    pointer operator->() const { return &(*blocks_)[block_][pos_]; }
    const_iterator& operator++() {
      if (++pos_ == (*blocks_)[block_].size()) {
        ++block_;
        pos_ = 0;
      }
      return *this;
    }
    const_iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    bool operator==(const const_iterator& o) const {
      return block_ == o.block_ && pos_ == o.pos_;
    }

   private:
    friend class RankedSet;
    const_iterator(const std::vector<std::vector<T>>* b, std::size_t block, std::size_t pos)
        : blocks_(b), block_(block), pos_(pos) {}
    const std::vector<std::vector<T>>* blocks_ = nullptr;
    std::size_t block_ = 0;
    std::size_t pos_ = 0;
  };

  RankedSet() = default;
  explicit RankedSet(Less less) : less_(std::move(less)) {}

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  void clear() {
    blocks_.clear();
    sizes_.clear();
    tops_.clear();
    size_ = 0;
  }

  const T& min() const {
    assert(!empty());
    return blocks_.front().front();
  }
  const T& max() const {
    assert(!empty());
    return blocks_.back().back();
  }

  const_iterator begin() const { return {&blocks_, 0, 0}; }
  const_iterator end() const { return {&blocks_, blocks_.size(), 0}; }

  /// k-th smallest element, 0-based.
  const T& at_rank(std::size_t k) const {
    auto [b, pos] = locate(k);
    return blocks_[b][pos];
  }

  /// Inserts and returns the 0-based rank of the new element. Equal
  /// elements are placed after existing ones.
  std::size_t insert(const T& value) {
    if (blocks_.empty()) {
      blocks_.emplace_back();
      blocks_.back().reserve(2 * kBlock);
      blocks_.back().push_back(value);
      sizes_.push_back(1);
      tops_.push_back(value);
      size_ = 1;
      return 0;
    }
    // First block whose last element is greater than value.
    std::size_t b = 0;
    std::size_t rank = 0;
    const std::size_t last = blocks_.size() - 1;
    while (b < last && !less_(value, tops_[b])) {
      rank += sizes_[b];
      ++b;
    }
    auto& block = blocks_[b];
    auto it = std::upper_bound(block.begin(), block.end(), value, less_);
    rank += static_cast<std::size_t>(it - block.begin());
    block.insert(it, value);
    ++sizes_[b];
    tops_[b] = block.back();
    ++size_;
    if (block.size() >= 2 * kBlock) split(b);
    return rank;
  }

  /// Removes and returns the k-th smallest element, 0-based.
  T erase_rank(std::size_t k) {
    if (k >= size_) throw std::out_of_range("RankedSet::erase_rank");
    auto [b, pos] = locate(k);
    auto& block = blocks_[b];
    T out = block[pos];
    block.erase(block.begin() + static_cast<std::ptrdiff_t>(pos));
    --sizes_[b];
    --size_;
    if (block.empty()) {
      remove_block(b);
    } else {
      tops_[b] = block.back();
      if (block.size() < kBlock / 4 && b + 1 < blocks_.size() &&
          block.size() + sizes_[b + 1] < 2 * kBlock) {
        auto& next = blocks_[b + 1];
        block.insert(block.end(), next.begin(), next.end());
        sizes_[b] = block.size();
        tops_[b] = block.back();
        remove_block(b + 1);
      }
    }
    return out;
  }

  T erase_min() { return erase_rank(0); }
  T erase_max() { return erase_rank(size_ - 1); }

  std::vector<T> to_vector() const {
    std::vector<T> out;
    out.reserve(size_);
    for (const auto& block : blocks_) out.insert(out.end(), block.begin(), block.end());
    return out;
  }

 private:
  std::pair<std::size_t, std::size_t> locate(std::size_t k) const {
    assert(k < size_);
    // Walk from whichever end is closer; ranks near the top are common
    // ("j-th largest" with small j).
    if (k < size_ / 2) {
      std::size_t b = 0;
      while (k >= sizes_[b]) {
        k -= sizes_[b];
        ++b;
      }
      return {b, k};
    }
    std::size_t from_top = size_ - 1 - k;
    std::size_t b = blocks_.size() - 1;
    while (from_top >= sizes_[b]) {
      from_top -= sizes_[b];
      --b;
    }
    return {b, sizes_[b] - 1 - from_top};
  }

  void split(std::size_t b) {
    auto& block = blocks_[b];
    std::vector<T> upper;
    upper.reserve(2 * kBlock);
    upper.assign(block.begin() + static_cast<std::ptrdiff_t>(kBlock), block.end());
    block.resize(kBlock);
    const auto at = static_cast<std::ptrdiff_t>(b + 1);
    sizes_[b] = kBlock;
    tops_[b] = block.back();
    sizes_.insert(sizes_.begin() + at, upper.size());
    tops_.insert(tops_.begin() + at, upper.back());
    blocks_.insert(blocks_.begin() + at, std::move(upper));
  }

  void remove_block(std::size_t b) {
    const auto at = static_cast<std::ptrdiff_t>(b);
    blocks_.erase(blocks_.begin() + at);
    sizes_.erase(sizes_.begin() + at);
    tops_.erase(tops_.begin() + at);
  }

  std::vector<std::vector<T>> blocks_;
  std::vector<std::size_t> sizes_;  // sizes_[b] == blocks_[b].size()
  std::vector<T> tops_;             // tops_[b] == blocks_[b].back()
  std::size_t size_ = 0;
  Less less_{};
};

}  // namespace virevo
