#include "cce/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace cce {

namespace {

/// Inventories rebuilt from a log. Actors start with the basic items; items an
/// actor uses without a logged acquisition (e.g. a log slice that starts
/// mid-life) are adopted the first time they appear.
class InventoryReplay {
 public:
  explicit InventoryReplay(const TaskTree& tree) : tree_(&tree) {}

  Inventory& before(const AttemptEvent& e) {
    auto it = inv_.find(e.actor_id);
    if (it == inv_.end()) it = inv_.emplace(e.actor_id, Inventory(tree_->size(), tree_->basic_items())).first;
    if (e.kind == EventKind::Attempt) {
      for (ItemId id : e.combination) {
        check(id);
        it->second.add(id);
      }
    }
    return it->second;
  }

  void after(const AttemptEvent& e) {
    if ((e.kind == EventKind::Attempt || e.kind == EventKind::SocialCopy) && e.outcome) {
      check(*e.outcome);
      inv_.at(e.actor_id).add(*e.outcome);
    }
  }

 private:
  void check(ItemId id) const {
    if (!tree_->contains(id)) throw std::invalid_argument("log references unknown item id " + std::to_string(id));
  }

  const TaskTree* tree_;
  std::unordered_map<int, Inventory> inv_;
};

std::string fmt_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double pair_mean(const Combination& c, const Eigen::MatrixXd& m) {
  if (c.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double total = 0;
  int n = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      total += m(c[i], c[j]);
      ++n;
    }
  }
  return total / n;
}

void check_matrix(const Eigen::MatrixXd* m, std::size_t n, const char* what) {
  if (m && (m->rows() < static_cast<Eigen::Index>(n) || m->cols() < static_cast<Eigen::Index>(n))) {
    throw std::invalid_argument(std::string(what) + " similarity matrix does not cover every item");
  }
}

struct ActorHistory {
  std::size_t attempts = 0;
  std::unordered_map<ItemId, std::size_t> times_selected;
  std::unordered_map<ItemId, std::size_t> last_selected;
  std::unordered_map<ItemId, std::size_t> successes;
  std::unordered_set<Combination, CombinationHash> discovered;
  std::unordered_map<ItemId, int> discovered_using;

  void discover(const Combination& c) {
    if (!discovered.insert(c).second) return;
    std::array<ItemId, Combination::kMaxSize> seen{};
    std::size_t n = 0;
    for (ItemId id : c) {
      if (std::find(seen.begin(), seen.begin() + n, id) != seen.begin() + n) continue;
      seen[n++] = id;
      ++discovered_using[id];
    }
  }
};

template <typename Map>
std::size_t lookup(const Map& m, ItemId id) {
  auto it = m.find(id);
  return it == m.end() ? 0 : it->second;
}

std::array<double, kFeatureNames.size()> features_of(const Combination& c, const Inventory& inv, const ActorHistory& h,
                                                     std::size_t T, const TaskTree& tree, const FeatureSources& src) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kFeatureNames.size()> f{};
  f[0] = src.semantic ? pair_mean(c, *src.semantic) : nan;
  f[1] = src.structural ? pair_mean(c, *src.structural) : nan;
  f[2] = src.color ? pair_mean(c, *src.color) : nan;
  double position = 0, reward = 0, unc = 0, rec = 0, succ = 0, emp = 0;
  for (ItemId id : c) {
    position += static_cast<double>(inv.position_of(id));
    reward += static_cast<double>(item_score(tree, id, src.score_base));
    unc += uncertainty_bonus(T, lookup(h.times_selected, id));
    auto last = h.last_selected.find(id);
    rec += static_cast<double>(last == h.last_selected.end() ? T : T - last->second);
    succ += static_cast<double>(lookup(h.successes, id));
    auto d = h.discovered_using.find(id);
    emp += static_cast<double>(tree.recipes_using(id) - (d == h.discovered_using.end() ? 0 : d->second));
  }
  const double n = static_cast<double>(c.size());
  f[3] = position / n;
  f[4] = n;
  f[5] = reward / n;
  f[6] = unc / n;
  f[7] = rec / n;
  f[8] = succ / n;
  f[9] = emp / n;
  return f;
}

/// Uniform multiset of the given size over `n` slots: choose `size` distinct
/// values from [0, n + size - 1) and subtract their rank.
Combination random_multiset(std::span<const ItemId> items, std::size_t size, Rng& rng) {
  const std::size_t range = items.size() + size - 1;
  std::array<std::size_t, Combination::kMaxSize> pick{};
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t v;
    do {
      v = uniform_index(rng, range);
    } while (std::find(pick.begin(), pick.begin() + i, v) != pick.begin() + i);
    pick[i] = v;
  }
  std::sort(pick.begin(), pick.begin() + size);
  std::array<ItemId, Combination::kMaxSize> ids{};
  for (std::size_t i = 0; i < size; ++i) ids[i] = items[pick[i] - i];
  return Combination(std::span<const ItemId>(ids.data(), size));
}

std::vector<Combination> sample_alternatives(const Inventory& inv, const Combination& actual, std::size_t k, Rng& rng) {
  const std::size_t n = inv.size();
  const std::size_t pairs = n * (n + 1) / 2;
  const std::size_t triples = n * (n + 1) * (n + 2) / 6;
  const std::size_t pool = pairs + triples - (actual.size() >= 2 ? 1 : 0);
  std::vector<Combination> out;
  if (k == 0 || pool == 0) return out;
  if (pool <= 4 * k) {
    std::vector<Combination> all;
    for (const auto& c : enumerate_actions(inv.items())) {
      if (c.size() >= 2 && c != actual) all.push_back(c);
    }
    const std::size_t take = std::min(k, all.size());
    for (std::size_t i = 0; i < take; ++i) std::swap(all[i], all[i + uniform_index(rng, all.size() - i)]);
    all.resize(take);
    return all;
  }
  std::unordered_set<Combination, CombinationHash> seen{actual};
  while (out.size() < k) {
    const std::size_t size = uniform_index(rng, pairs + triples) < pairs ? 2 : 3;
    Combination c = random_multiset(inv.items(), size, rng);
    if (seen.insert(c).second) out.push_back(c);
  }
  return out;
}

void z_normalize(std::vector<FeatureRow>& rows, std::size_t begin, std::size_t end) {
  for (std::size_t f = 0; f < kFeatureNames.size(); ++f) {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t r = begin; r < end; ++r) {
      if (!std::isnan(rows[r].features[f])) {
        sum += rows[r].features[f];
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0;
    for (std::size_t r = begin; r < end; ++r) {
      if (!std::isnan(rows[r].features[f])) ss += (rows[r].features[f] - mean) * (rows[r].features[f] - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (std::size_t r = begin; r < end; ++r) {
      double& v = rows[r].features[f];
      if (std::isnan(v)) continue;
      v = sd > 0 ? (v - mean) / sd : 0.0;
    }
  }
}

}  // namespace

std::vector<RepertoirePoint> repertoire_series(const Trajectory& t) {
  std::vector<RepertoirePoint> out;
  out.reserve(t.records.size());
  for (const auto& r : t.records) out.push_back({r.generation, r.repertoire_instant, r.repertoire_cumulative});
  return out;
}

std::vector<RepertoirePoint> repertoire_series(std::span<const AttemptEvent> log, const TaskTree& tree) {
  std::vector<char> found(tree.size(), 0);
  int count = 0;
  for (ItemId id : tree.basic_items()) {
    found[id] = 1;
    ++count;
  }
  std::vector<RepertoirePoint> out{{0, count, count}};
  int step = 0;
  for (const auto& e : log) {
    ++step;
    if ((e.kind == EventKind::Attempt || e.kind == EventKind::SocialCopy) && e.outcome) {
      if (!tree.contains(*e.outcome)) throw std::invalid_argument("log references unknown item id " + std::to_string(*e.outcome));
      if (!found[*e.outcome]) {
        found[*e.outcome] = 1;
        ++count;
      }
    }
    out.push_back({step, count, count});
  }
  return out;
}

double entropy_nats(std::span<const std::size_t> counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0) return 0;
  double h = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

std::map<std::uint64_t, StateEntropy> entropy_by_state(std::span<const AttemptEvent> log, const TaskTree& tree) {
  std::map<std::uint64_t, std::unordered_map<Combination, std::size_t, CombinationHash>> hist;
  std::map<std::uint64_t, StateEntropy> out;
  InventoryReplay replay(tree);
  for (const auto& e : log) {
    const Inventory& inv = replay.before(e);
    if (e.kind == EventKind::Attempt) {
      auto& slot = out[e.state_hash];
      if (slot.attempts == 0) slot.inventory_size = inv.size();
      ++slot.attempts;
      ++hist[e.state_hash][Combination(std::span<const ItemId>(e.combination))];
    }
    replay.after(e);
  }
  for (auto& [state, h] : hist) {
    std::vector<std::size_t> counts;
    counts.reserve(h.size());
    for (const auto& [c, n] : h) counts.push_back(n);
    // Fixed summation order, so results do not depend on hash-map layout.
    std::sort(counts.begin(), counts.end(), std::greater<>());
    out[state].entropy = entropy_nats(counts);
    out[state].distinct = counts.size();
  }
  return out;
}

std::vector<UniqueActionsRow> unique_actions_by_state(std::span<const AttemptEvent> log, const TaskTree& tree) {
  std::vector<UniqueActionsRow> rows;
  std::map<std::pair<int, std::uint64_t>, std::size_t> row_of;
  std::unordered_map<int, std::unordered_set<Combination, CombinationHash>> tried;
  InventoryReplay replay(tree);
  for (const auto& e : log) {
    const Inventory& inv = replay.before(e);
    if (e.kind == EventKind::Attempt) {
      auto& seen = tried[e.actor_id];
      seen.insert(Combination(std::span<const ItemId>(e.combination)));
      auto [it, fresh] = row_of.try_emplace({e.actor_id, e.state_hash}, rows.size());
      if (fresh) rows.push_back({e.actor_id, e.state_hash, inv.size(), 0, 0});
      auto& row = rows[it->second];
      row.unique_cumulative = seen.size();
      row.normalized = static_cast<double>(row.unique_cumulative) / static_cast<double>(row.inventory_size);
    }
    replay.after(e);
  }
  return rows;
}

std::vector<std::array<double, kStrategyCount>> strategy_proportions(const Trajectory& t) {
  std::vector<std::array<double, kStrategyCount>> out;
  out.reserve(t.records.size());
  for (const auto& r : t.records) {
    double total = 0;
    for (int c : r.strategy_counts) total += c;
    std::array<double, kStrategyCount> p{};
    if (total > 0) {
      for (int i = 0; i < kStrategyCount; ++i) p[i] = r.strategy_counts[i] / total;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<ConsecutiveRow> consecutive_similarity(std::span<const AttemptEvent> log, const Eigen::MatrixXd& sim) {
  std::unordered_map<int, const AttemptEvent*> previous;
  std::unordered_map<int, std::size_t> count;
  std::vector<ConsecutiveRow> out;
  auto at = [&](ItemId a, ItemId b) {
    if (a >= sim.rows() || b >= sim.cols()) throw std::invalid_argument("similarity matrix does not cover item " + std::to_string(std::max(a, b)));
    return sim(a, b);
  };
  for (const auto& e : log) {
    if (e.kind != EventKind::Attempt || e.combination.empty()) continue;
    const std::size_t index = ++count[e.actor_id];
    auto it = previous.find(e.actor_id);
    if (it != previous.end()) {
      const auto& prev = it->second->combination;
      double total = 0;
      for (ItemId b : e.combination) {
        double best = -std::numeric_limits<double>::infinity();
        for (ItemId a : prev) best = std::max(best, at(a, b));
        total += best;
      }
      out.push_back({e.actor_id, index, it->second->outcome.has_value(), total / static_cast<double>(e.combination.size())});
    }
    previous[e.actor_id] = &e;
  }
  return out;
}

std::vector<FeatureRow> behavioral_feature_table(std::span<const AttemptEvent> log, const TaskTree& tree,
                                                 const FeatureSources& sources, std::size_t k, Rng& rng,
                                                 bool normalize) {
  check_matrix(sources.semantic, tree.size(), "semantic");
  check_matrix(sources.structural, tree.size(), "structural");
  check_matrix(sources.color, tree.size(), "color");

  std::unordered_map<int, ActorHistory> history;
  std::map<int, std::vector<FeatureRow>> by_actor;
  InventoryReplay replay(tree);
  for (const auto& e : log) {
    const Inventory& inv = replay.before(e);
    auto& h = history[e.actor_id];
    if (e.kind == EventKind::Attempt && !e.combination.empty()) {
      const Combination c(std::span<const ItemId>(e.combination));
      const std::size_t T = ++h.attempts;
      if (c.size() >= 2) {
        auto& rows = by_actor[e.actor_id];
        rows.push_back({e.actor_id, T, true, c, features_of(c, inv, h, T, tree, sources)});
        for (const auto& alt : sample_alternatives(inv, c, k, rng)) {
          rows.push_back({e.actor_id, T, false, alt, features_of(alt, inv, h, T, tree, sources)});
        }
      }
      std::array<ItemId, Combination::kMaxSize> seen{};
      std::size_t n = 0;
      for (ItemId id : c) {
        if (std::find(seen.begin(), seen.begin() + n, id) != seen.begin() + n) continue;
        seen[n++] = id;
        ++h.times_selected[id];
        h.last_selected[id] = T;
        if (e.outcome) ++h.successes[id];
      }
      if (e.outcome) h.discover(c);
    } else if (e.kind == EventKind::SocialCopy && e.outcome) {
      if (auto recipe = tree.recipe_for(*e.outcome)) h.discover(*recipe);
    }
    replay.after(e);
  }

  std::vector<FeatureRow> out;
  for (auto& [actor, rows] : by_actor) {
    if (normalize) z_normalize(rows, 0, rows.size());
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return out;
}

std::string feature_table_csv(const std::vector<FeatureRow>& rows) {
  std::string out = "actor,attempt_index,is_actual,combination";
  for (const char* name : kFeatureNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.actor) + ',' + std::to_string(r.attempt_index) + ',' + (r.is_actual ? "1" : "0") + ',';
    for (std::size_t i = 0; i < r.combination.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(r.combination[i]);
    }
    for (double v : r.features) out += ',' + fmt_double(v);
    out += '\n';
  }
  return out;
}

std::string entropy_csv(const std::map<std::uint64_t, StateEntropy>& entropy) {
  std::string out = "state_hash,inventory_size,attempts,distinct,entropy\n";
  for (const auto& [state, s] : entropy) {
    out += hash_to_hex(state) + ',' + std::to_string(s.inventory_size) + ',' + std::to_string(s.attempts) + ',' +
           std::to_string(s.distinct) + ',' + fmt_double(s.entropy) + '\n';
  }
  return out;
}

std::string unique_actions_csv(const std::vector<UniqueActionsRow>& rows) {
  std::string out = "actor,state_hash,inventory_size,unique_cumulative,normalized\n";
  for (const auto& r : rows) {
    out += std::to_string(r.actor) + ',' + hash_to_hex(r.state) + ',' + std::to_string(r.inventory_size) + ',' +
           std::to_string(r.unique_cumulative) + ',' + fmt_double(r.normalized) + '\n';
  }
  return out;
}

std::string consecutive_csv(const std::vector<ConsecutiveRow>& rows) {
  std::string out = "actor,attempt_index,prior_success,similarity\n";
  for (const auto& r : rows) {
    out += std::to_string(r.actor) + ',' + std::to_string(r.attempt_index) + ',' + (r.prior_success ? "1" : "0") + ',' +
           fmt_double(r.similarity) + '\n';
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
    i = j + 1;
  }
  return ranks;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (p < 0 || p > 1) throw std::invalid_argument("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double h = (n + 1.0 / 3.0) * p + 1.0 / 3.0;
  if (h <= 1) return values.front();
  if (h >= n) return values.back();
  const auto j = static_cast<std::size_t>(std::floor(h));
  return values[j - 1] + (h - static_cast<double>(j)) * (values[j] - values[j - 1]);
}

}  // namespace cce
