#include "cce/task_tree.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cce/rng.hpp"

namespace cce {

extern const char* const kDefaultTreeJson;

namespace {

using nlohmann::json;

std::string recipe_label(std::size_t index, const json& rec) {
  std::string label = "recipe #" + std::to_string(index);
  if (rec.is_object() && rec.contains("product")) label += " (product " + rec["product"].dump() + ")";
  return label;
}

}  // namespace

TaskTree::TaskTree(std::vector<Item> items, std::vector<Recipe> recipes, std::vector<int> level_sizes)
    : items_(std::move(items)), recipes_(std::move(recipes)), level_sizes_(std::move(level_sizes)) {
  const std::size_t n = items_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (items_[i].id != i) throw TaskError("item ids must be dense 0..n-1; position " + std::to_string(i) + " holds id " + std::to_string(items_[i].id));
    if (items_[i].level < 0 || items_[i].level >= static_cast<int>(level_sizes_.size())) {
      throw TaskError("item " + std::to_string(i) + " ('" + items_[i].name + "') has level " + std::to_string(items_[i].level) + " outside declared levels");
    }
  }
  std::vector<int> counted(level_sizes_.size(), 0);
  for (const auto& it : items_) ++counted[it.level];
  if (counted != level_sizes_) throw TaskError("declared level sizes do not match item levels");
  for (const auto& it : items_) {
    if (it.level == 0) basic_.push_back(it.id);
  }
  if (basic_.empty()) throw TaskError("tree declares no basic (level 0) items");

  recipe_of_.assign(n, std::nullopt);
  uses_.assign(n, 0);
  for (std::size_t r = 0; r < recipes_.size(); ++r) {
    const auto& rec = recipes_[r];
    const std::string label = "recipe #" + std::to_string(r) + " (product " + std::to_string(rec.product) + ")";
    if (rec.ingredients.empty()) throw TaskError(label + ": no ingredients");
    if (rec.product >= n) throw TaskError(label + ": product id is not a declared item");
    int max_level = 0;
    for (ItemId id : rec.ingredients) {
      if (id >= n) throw TaskError(label + ": ingredient " + std::to_string(id) + " is not a declared item");
      max_level = std::max(max_level, items_[id].level);
    }
    if (items_[rec.product].level == 0) throw TaskError(label + ": a basic item cannot be a product");
    if (items_[rec.product].level <= max_level) throw TaskError(label + ": product level must exceed every ingredient level");
    if (!by_ingredients_.emplace(rec.ingredients, rec.product).second) {
      throw TaskError(label + ": duplicate ingredient multiset " + to_string(rec.ingredients));
    }
    if (recipe_of_[rec.product]) throw TaskError(label + ": item already produced by another recipe");
    recipe_of_[rec.product] = r;
    std::vector<ItemId> distinct(rec.ingredients.begin(), rec.ingredients.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (ItemId id : distinct) ++uses_[id];
  }

  // Bottom-up closure from the basic items.
  std::vector<char> reached(n, 0);
  for (ItemId id : basic_) reached[id] = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& rec : recipes_) {
      if (reached[rec.product]) continue;
      if (std::all_of(rec.ingredients.begin(), rec.ingredients.end(), [&](ItemId id) { return reached[id] != 0; })) {
        reached[rec.product] = 1;
        grew = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!reached[i]) throw TaskError("item " + std::to_string(i) + " ('" + items_[i].name + "') is unreachable from the basic items");
  }
}

const Item& TaskTree::item(ItemId id) const {
  if (id >= items_.size()) throw TaskError("unknown item id " + std::to_string(id));
  return items_[id];
}

std::optional<ItemId> TaskTree::find_recipe(const Combination& c) const {
  auto it = by_ingredients_.find(c);
  if (it == by_ingredients_.end()) return std::nullopt;
  return it->second;
}

std::optional<Combination> TaskTree::recipe_for(ItemId product) const {
  if (product >= items_.size()) throw TaskError("unknown item id " + std::to_string(product));
  const auto& r = recipe_of_[product];
  if (!r) return std::nullopt;
  return recipes_[*r].ingredients;
}

std::optional<ItemId> TaskTree::find_by_name(std::string_view name) const {
  for (const auto& it : items_) {
    if (it.name == name) return it.id;
  }
  return std::nullopt;
}

std::uint64_t TaskTree::recipe_hash() const {
  std::uint64_t h = mix64(items_.size());
  for (const auto& rec : recipes_) h += mix64(rec.ingredients.hash() ^ mix64(rec.product + 0x51ULL));
  return h;
}

TaskTree load_task_tree(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw TaskError(std::string("task tree parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw TaskError("task tree document must be an object");
  for (const char* key : {"levels", "items", "recipes"}) {
    if (!doc.contains(key) || !doc[key].is_array()) throw TaskError(std::string("task tree field '") + key + "' missing or not an array");
  }
  std::vector<int> levels;
  for (const auto& v : doc["levels"]) {
    if (!v.is_number_integer() || v.get<int>() < 0) throw TaskError("task tree 'levels' must hold non-negative integers");
    levels.push_back(v.get<int>());
  }

  const auto& jitems = doc["items"];
  std::vector<std::optional<Item>> slots(jitems.size());
  for (std::size_t i = 0; i < jitems.size(); ++i) {
    const auto& ji = jitems[i];
    const std::string label = "item #" + std::to_string(i);
    if (!ji.is_object() || !ji.contains("id") || !ji.contains("name") || !ji.contains("level")) {
      throw TaskError(label + ": expected {id, name, level}");
    }
    if (!ji["id"].is_number_integer() || !ji["level"].is_number_integer() || !ji["name"].is_string()) {
      throw TaskError(label + ": field types must be {id: int, name: string, level: int}");
    }
    const auto id = ji["id"].get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= jitems.size()) throw TaskError(label + ": id " + std::to_string(id) + " is not dense in 0..n-1");
    if (slots[id]) throw TaskError(label + ": duplicate id " + std::to_string(id));
    slots[id] = Item{static_cast<ItemId>(id), ji["name"].get<std::string>(), ji["level"].get<int>()};
  }
  std::vector<Item> items;
  items.reserve(slots.size());
  for (auto& s : slots) items.push_back(std::move(*s));

  std::vector<Recipe> recipes;
  const auto& jrecipes = doc["recipes"];
  for (std::size_t r = 0; r < jrecipes.size(); ++r) {
    const auto& jr = jrecipes[r];
    const std::string label = recipe_label(r, jr);
    if (!jr.is_object() || !jr.contains("ingredients") || !jr.contains("product") || !jr["ingredients"].is_array() ||
        !jr["product"].is_number_integer()) {
      throw TaskError(label + ": expected {ingredients: [id...], product: id}");
    }
    std::vector<ItemId> ing;
    for (const auto& v : jr["ingredients"]) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw TaskError(label + ": ingredient ids must be non-negative integers");
      ing.push_back(v.get<ItemId>());
    }
    if (ing.empty() || ing.size() > Combination::kMaxSize) throw TaskError(label + ": recipes take 1 to 3 ingredients");
    const auto product = jr["product"].get<long long>();
    if (product < 0) throw TaskError(label + ": product id is not a declared item");
    recipes.push_back({Combination(ing), static_cast<ItemId>(product)});
  }
  return TaskTree(std::move(items), std::move(recipes), std::move(levels));
}

TaskTree load_task_tree_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TaskError("cannot read task tree file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_task_tree(ss.str());
}

std::string default_task_tree_json() { return kDefaultTreeJson; }

const TaskTree& default_task_tree() {
  static const TaskTree tree = load_task_tree(kDefaultTreeJson);
  return tree;
}

std::string task_tree_to_json(const TaskTree& tree) {
  json doc;
  doc["levels"] = std::vector<int>(tree.level_sizes().begin(), tree.level_sizes().end());
  doc["items"] = json::array();
  for (const auto& it : tree.items()) doc["items"].push_back({{"id", it.id}, {"name", it.name}, {"level", it.level}});
  doc["recipes"] = json::array();
  for (const auto& r : tree.recipes()) doc["recipes"].push_back({{"ingredients", r.ingredients.to_vector()}, {"product", r.product}});
  return doc.dump(1);
}

std::optional<ItemId> resolve_attempt(const TaskTree& tree, const Combination& c) {
  for (ItemId id : c) {
    if (!tree.contains(id)) throw TaskError("unknown item id " + std::to_string(id) + " in combination");
  }
  return tree.find_recipe(c);
}

std::int64_t item_score(const TaskTree& tree, ItemId id, double base) {
  const int level = tree.item(id).level;
  if (level == 0) return 0;
  return std::llround(std::pow(base, level));
}

std::uint64_t action_space_size(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("action space needs a non-empty inventory");
  // C(n,1) + C(n+1,2) + C(n+2,3)
  return n + n * (n + 1) / 2 + n * (n + 1) * (n + 2) / 6;
}

std::vector<Combination> enumerate_actions(std::span<const ItemId> items) {
  if (items.empty()) throw std::invalid_argument("cannot enumerate actions of an empty inventory");
  std::vector<ItemId> s(items.begin(), items.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  const std::size_t n = s.size();
  std::vector<Combination> out;
  out.reserve(action_space_size(n));
  for (std::size_t i = 0; i < n; ++i) out.push_back({s[i]});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.push_back({s[i], s[j]});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) out.push_back({s[i], s[j], s[k]});
  return out;
}

namespace {

std::vector<Recipe> random_rules(const std::vector<Item>& items, Rng& rng) {
  const int levels = 1 + std::accumulate(items.begin(), items.end(), 0, [](int m, const Item& it) { return std::max(m, it.level); });
  std::vector<std::vector<ItemId>> by_level(levels);
  for (const auto& it : items) by_level[it.level].push_back(it.id);

  std::vector<Recipe> recipes;
  std::unordered_map<Combination, ItemId, CombinationHash> used;
  std::vector<ItemId> lower;
  for (int level = 1; level < levels; ++level) {
    lower.insert(lower.end(), by_level[level - 1].begin(), by_level[level - 1].end());
    const auto& previous = by_level[level - 1];
    for (ItemId product : by_level[level]) {
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        std::size_t size = 1 + uniform_index(rng, 3);
        size = std::min(size, lower.size());
        std::vector<ItemId> ing{previous[uniform_index(rng, previous.size())]};
        while (ing.size() < size) {
          ItemId cand = lower[uniform_index(rng, lower.size())];
          if (std::find(ing.begin(), ing.end(), cand) == ing.end()) ing.push_back(cand);
        }
        Combination c(ing);
        if (used.emplace(c, product).second) {
          recipes.push_back({c, product});
          placed = true;
        }
      }
      if (!placed) throw TaskError("could not place a unique recipe for level " + std::to_string(level) + "; level sizes too large for the items below");
    }
  }
  return recipes;
}

}  // namespace

TaskTree generate_task_variant(const TaskTree& tree, VariantMode mode,
                               const std::optional<std::vector<int>>& level_sizes, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0x7a5cULL);
  if (mode == VariantMode::ShuffleRules) {
    std::vector<Item> items(tree.items().begin(), tree.items().end());
    auto recipes = random_rules(items, rng);
    return TaskTree(std::move(items), std::move(recipes), std::vector<int>(tree.level_sizes().begin(), tree.level_sizes().end()));
  }
  if (!level_sizes || level_sizes->empty()) throw TaskError("resize variant requires level sizes");
  const auto& sizes = *level_sizes;
  if (sizes[0] != 6) throw TaskError("resize variant requires exactly 6 basic items (level_sizes[0] = 6)");
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    if (sizes[l] < 1) throw TaskError("level " + std::to_string(l) + " size must be at least 1");
  }
  std::vector<Item> items;
  for (ItemId b : tree.basic_items()) {
    if (items.size() == 6) break;
    items.push_back({static_cast<ItemId>(items.size()), tree.item(b).name, 0});
  }
  while (items.size() < 6) items.push_back({static_cast<ItemId>(items.size()), "basic_" + std::to_string(items.size()), 0});
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    for (int k = 0; k < sizes[l]; ++k) {
      items.push_back({static_cast<ItemId>(items.size()), "item_l" + std::to_string(l) + "_" + std::to_string(k), static_cast<int>(l)});
    }
  }
  auto recipes = random_rules(items, rng);
  return TaskTree(std::move(items), std::move(recipes), sizes);
}

}  // namespace cce
