#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cce {

using ItemId = std::uint32_t;

/// Multiset of 1 to 3 item ids kept in ascending order, so equal multisets
/// compare and hash identically.
class Combination {
 public:
  static constexpr std::size_t kMaxSize = 3;

  Combination() = default;
  Combination(std::initializer_list<ItemId> items) : Combination(std::span<const ItemId>(items.begin(), items.size())) {}
  explicit Combination(std::span<const ItemId> items) {
    if (items.empty() || items.size() > kMaxSize) {
      throw std::invalid_argument("combination must hold 1 to 3 items, got " + std::to_string(items.size()));
    }
    size_ = static_cast<std::uint8_t>(items.size());
    std::copy(items.begin(), items.end(), items_.begin());
    std::sort(items_.begin(), items_.begin() + size_);
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  ItemId operator[](std::size_t i) const { return items_[i]; }
  std::span<const ItemId> items() const { return {items_.data(), size_}; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.begin() + size_; }

  bool contains(ItemId id) const { return std::find(begin(), end(), id) != end(); }
  bool has_repeats() const {
    return std::adjacent_find(begin(), end()) != end();
  }

  /// Copy with the item at `position` swapped for `replacement`, re-canonicalized.
  Combination with_replaced(std::size_t position, ItemId replacement) const {
    std::array<ItemId, kMaxSize> tmp = items_;
    tmp[position] = replacement;
    return Combination(std::span<const ItemId>(tmp.data(), size_));
  }

  std::vector<ItemId> to_vector() const { return {begin(), end()}; }

  friend bool operator==(const Combination& a, const Combination& b) {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
  }
  friend std::strong_ordering operator<=>(const Combination& a, const Combination& b) {
    if (auto c = a.size_ <=> b.size_; c != 0) return c;
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ size_;
    for (ItemId id : *this) {
      h ^= id + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::array<ItemId, kMaxSize> items_{};
  std::uint8_t size_ = 0;
};

struct CombinationHash {
  std::size_t operator()(const Combination& c) const { return static_cast<std::size_t>(c.hash()); }
};

std::string to_string(const Combination& c);

/// Owned items, in acquisition order, with O(1) membership and an
/// order-independent state hash.
class Inventory {
 public:
  Inventory() = default;
  Inventory(std::size_t vocab_size, std::span<const ItemId> initial);

  bool contains(ItemId id) const { return id < owned_.size() && owned_[id]; }
  bool contains_all(const Combination& c) const {
    return std::all_of(c.begin(), c.end(), [this](ItemId id) { return contains(id); });
  }
  /// Returns false when the item was already owned.
  bool add(ItemId id);

  std::size_t size() const { return order_.size(); }
  std::size_t vocab_size() const { return owned_.size(); }
  std::span<const ItemId> items() const { return order_; }
  std::vector<ItemId> sorted_items() const;
  /// Hash of the owned set; identical for equal sets regardless of order.
  std::uint64_t state_hash() const { return hash_; }

  /// 1-based display slot (acquisition order), 0 when not owned.
  std::size_t position_of(ItemId id) const;

  friend bool operator==(const Inventory& a, const Inventory& b) { return a.owned_ == b.owned_; }

 private:
  std::vector<char> owned_;
  std::vector<ItemId> order_;
  std::uint64_t hash_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::string hash_to_hex(std::uint64_t h);
std::uint64_t hash_from_hex(const std::string& s);

}  // namespace cce

template <>
struct std::hash<cce::Combination> {
  std::size_t operator()(const cce::Combination& c) const noexcept { return static_cast<std::size_t>(c.hash()); }
};
