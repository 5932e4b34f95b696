#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cce/combination.hpp"

namespace cce {

class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Item {
  ItemId id = 0;
  std::string name;
  int level = 0;
};

struct Recipe {
  Combination ingredients;
  ItemId product = 0;
};

/// Immutable item hierarchy plus the recipe table. Every non-basic item is the
/// product of exactly one recipe and is reachable from the basic items.
class TaskTree {
 public:
  TaskTree(std::vector<Item> items, std::vector<Recipe> recipes, std::vector<int> level_sizes);

  std::size_t size() const { return items_.size(); }
  std::span<const Item> items() const { return items_; }
  const Item& item(ItemId id) const;
  std::span<const Recipe> recipes() const { return recipes_; }
  std::span<const int> level_sizes() const { return level_sizes_; }
  std::span<const ItemId> basic_items() const { return basic_; }
  int max_level() const { return static_cast<int>(level_sizes_.size()) - 1; }

  bool contains(ItemId id) const { return id < items_.size(); }
  std::optional<ItemId> find_recipe(const Combination& c) const;
  /// Ingredients producing `product`; nullopt for basic items.
  std::optional<Combination> recipe_for(ItemId product) const;
  /// Number of recipes listing `id` among their ingredients.
  int recipes_using(ItemId id) const { return uses_.at(id); }
  std::optional<ItemId> find_by_name(std::string_view name) const;

  /// Hash of the recipe set; independent of names.
  std::uint64_t recipe_hash() const;

 private:
  std::vector<Item> items_;
  std::vector<Recipe> recipes_;
  std::vector<int> level_sizes_;
  std::vector<ItemId> basic_;
  std::unordered_map<Combination, ItemId, CombinationHash> by_ingredients_;
  std::vector<std::optional<std::size_t>> recipe_of_;
  std::vector<int> uses_;
};

TaskTree load_task_tree(std::string_view json_text);
TaskTree load_task_tree_file(const std::filesystem::path& path);
/// The bundled 11-level totem task.
const TaskTree& default_task_tree();
std::string default_task_tree_json();
std::string task_tree_to_json(const TaskTree& tree);

/// Product of `c`, or nullopt when no recipe matches. Throws on unknown ids.
std::optional<ItemId> resolve_attempt(const TaskTree& tree, const Combination& c);

/// 0 for basic items, otherwise round(base^level).
std::int64_t item_score(const TaskTree& tree, ItemId id, double base = 2.0);

/// Number of distinct multisets of size 1..3 over n items.
std::uint64_t action_space_size(std::uint64_t n);

/// Every distinct multiset of size 1..3 over `items`, canonical, sizes ascending.
std::vector<Combination> enumerate_actions(std::span<const ItemId> items);
inline std::vector<Combination> enumerate_actions(const Inventory& inv) { return enumerate_actions(inv.items()); }

enum class VariantMode { ShuffleRules, Resize };

TaskTree generate_task_variant(const TaskTree& tree, VariantMode mode,
                               const std::optional<std::vector<int>>& level_sizes, std::uint64_t seed);

}  // namespace cce
