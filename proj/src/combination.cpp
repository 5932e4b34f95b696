#include "cce/combination.hpp"

#include <cstdio>

namespace cce {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string hash_to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t hash_from_hex(const std::string& s) {
  std::size_t used = 0;
  const auto value = std::stoull(s, &used, 16);
  if (used != s.size()) throw std::invalid_argument("bad state hash '" + s + "'");
  return value;
}

std::string to_string(const Combination& c) {
  std::string out = "{";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(c[i]);
  }
  return out + "}";
}

Inventory::Inventory(std::size_t vocab_size, std::span<const ItemId> initial) : owned_(vocab_size, 0) {
  for (ItemId id : initial) add(id);
}

bool Inventory::add(ItemId id) {
  if (id >= owned_.size()) throw std::out_of_range("item id " + std::to_string(id) + " outside inventory vocabulary");
  if (owned_[id]) return false;
  owned_[id] = 1;
  order_.push_back(id);
  hash_ += mix64(id + 1);
  return true;
}

std::vector<ItemId> Inventory::sorted_items() const {
  std::vector<ItemId> out(order_);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Inventory::position_of(ItemId id) const {
  if (!contains(id)) return 0;
  return static_cast<std::size_t>(std::find(order_.begin(), order_.end(), id) - order_.begin()) + 1;
}

}  // namespace cce
