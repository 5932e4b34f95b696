#include <doctest.h>

#include <cmath>
#include <map>

#include "cce/agent.hpp"

using namespace cce;

namespace {

// Exact probability of each multiset under "n uniform in {1,2,3}, then n
// items uniform with replacement", by enumerating ordered tuples.
std::map<Combination, double> n_then_items_distribution(const std::vector<ItemId>& items) {
  std::map<Combination, double> p;
  const double m = static_cast<double>(items.size());
  for (ItemId a : items) {
    p[Combination{a}] += 1.0 / 3 / m;
    for (ItemId b : items) {
      p[Combination{a, b}] += 1.0 / 3 / (m * m);
      for (ItemId c : items) p[Combination{a, b, c}] += 1.0 / 3 / (m * m * m);
    }
  }
  return p;
}

double chi_square_against(const std::map<Combination, std::size_t>& counts, const std::map<Combination, double>& p, std::size_t n) {
  double s = 0;
  for (const auto& [c, prob] : p) {
    const double e = prob * static_cast<double>(n);
    const auto it = counts.find(c);
    const double o = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    s += (o - e) * (o - e) / e;
  }
  return s;
}

double entropy_of(const std::map<Combination, std::size_t>& counts, std::size_t n) {
  double h = 0;
  for (const auto& [c, k] : counts) {
    const double q = static_cast<double>(k) / static_cast<double>(n);
    h -= q * std::log(q);
  }
  return h;
}

// chi2.ppf(0.999, 82)
constexpr double kChi2Crit82 = 127.324;

const Recipe& basic_recipe(const TaskTree& t) {
  for (const auto& r : t.recipes()) {
    if (std::all_of(r.ingredients.begin(), r.ingredients.end(), [&](ItemId i) { return t.item(i).level == 0; })) return r;
  }
  throw std::logic_error("no basic recipe");
}

Agent random_agent(int id, const TaskTree& t, bool social = false) {
  return make_agent(id, t, Strategy{false, social}, BehaviorParams{}, std::nullopt);
}

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("strategy naming and parameter gating") {
  for (int i = 0; i < kStrategyCount; ++i) CHECK(strategy_from_name(Strategy::from_index(i).name()).index() == i);
  CHECK(Strategy{true, true}.name() == "semantic_social");
  CHECK_THROWS(strategy_from_name("clever"));
  const auto p = BehaviorParams{}.for_strategy(Strategy{false, false});
  CHECK(p.p_s == 0);
  CHECK(p.p_g == 0);
  CHECK(p.p_sl == 0);
  CHECK(BehaviorParams{}.for_strategy(Strategy{true, true}).p_s == 0.9);
  CHECK_THROWS(make_agent(0, default_task_tree(), Strategy{true, false}, BehaviorParams{}, std::nullopt));
  CHECK_THROWS(make_agent(0, default_task_tree(), Strategy{false, false}, BehaviorParams{}, EmbeddingNetd(184, 2, 2)));
}

TEST_CASE("random path follows the n-then-items distribution") {
  const auto& t = default_task_tree();
  const auto agent = random_agent(0, t);
  const AgentContext ctx{&t};
  Rng rng = make_stream(42, 1);
  std::map<Combination, std::size_t> counts;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) counts[choose_individual_action(agent, ctx, rng).combination]++;
  const std::vector<ItemId> items(t.basic_items().begin(), t.basic_items().end());
  const auto p = n_then_items_distribution(items);
  CHECK(p.size() == 83);
  CHECK(counts.size() == 83);
  CHECK(chi_square_against(counts, p, n) < kChi2Crit82);
}

TEST_CASE("combination size is uniform over 1..3") {
  const auto& t = default_task_tree();
  const auto agent = random_agent(0, t);
  const AgentContext ctx{&t};
  Rng rng = make_stream(7, 1);
  std::array<std::size_t, 3> sizes{};
  const double n = 100000;
  for (int i = 0; i < n; ++i) sizes[choose_individual_action(agent, ctx, rng).combination.size() - 1]++;
  const double sigma = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  for (auto s : sizes) CHECK(std::abs(s - n / 3) < 3 * sigma);
}

TEST_CASE("trained prediction pairs the first item with its learned partner") {
  const auto& t = default_task_tree();
  const ItemId a = t.basic_items()[1], b = t.basic_items()[4];
  auto net = init_net(184, 16, 16, 3);
  const std::vector<TrainingPair> pairs{{a, b}};
  train<double>(net, pairs, 200, 0.05);
  BehaviorParams bp;
  bp.p_s = 1;
  bp.p_g = 0;
  Agent agent = make_agent(0, t, Strategy{true, false}, bp, net);
  AgentContext ctx{&t};
  ctx.predict_mode = PredictMode::Argmax;
  Rng rng = make_stream(1, 2);
  const auto items = agent.inventory.items();
  std::map<ItemId, ItemId> partner;
  for (ItemId x : items) partner[x] = predict_partner(*agent.net, x, items, PredictMode::Argmax, rng);
  CHECK(partner[a] == b);
  std::size_t ab = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto choice = choose_individual_action(agent, ctx, rng, 2);
    CHECK(choice.path == ActionPath::Predict);
    bool explained = false;
    for (ItemId x : items) explained = explained || choice.combination == Combination{x, partner[x]};
    CHECK(explained);
    ab += choice.combination == Combination{a, b};
  }
  // t1 = a happens with probability 1/6.
  CHECK(ab >= 400);
}

TEST_CASE("generalization substitutes the nearest inventory item") {
  const auto& t = default_task_tree();
  const auto basics = t.basic_items();
  const ItemId a = basics[0], b = basics[1], c = basics[2];
  EmbeddingNetd net(184, 3, 2);
  for (ItemId i : basics) net.embeddings().row(i) << 0, 0, 1;
  net.embeddings().row(a) << -1, 1, 0;
  net.embeddings().row(b) << 1, 0, 0;
  net.embeddings().row(c) << 0.9, 0.1, 0;
  Agent agent = make_agent(0, t, Strategy{true, false}, BehaviorParams{}, net);
  agent.success_memory.push_back({Combination{a, b}, 99});
  Rng rng = make_stream(2, 2);
  bool saw_ac = false;
  for (int i = 0; i < 200; ++i) {
    const auto g = generalize_action(agent, rng);
    REQUIRE(g.has_value());
    saw_ac = saw_ac || *g == Combination{a, c};
    // Either b was swapped for c, or a was swapped for its own nearest neighbour.
    CHECK((*g == Combination{a, c} || g->contains(b)));
  }
  CHECK(saw_ac);
}

TEST_CASE("generalization ties fall to the lowest id") {
  const auto& t = default_task_tree();
  const auto basics = t.basic_items();
  EmbeddingNetd net(184, 2, 2);
  for (Eigen::Index i = 0; i < 184; ++i) net.embeddings().row(i) << 1, 1;
  Agent agent = make_agent(0, t, Strategy{true, false}, BehaviorParams{}, net);
  agent.success_memory.push_back({Combination{basics[3], basics[4]}, 99});
  Rng rng = make_stream(3, 3);
  const ItemId lowest = *std::min_element(basics.begin(), basics.end());
  for (int i = 0; i < 50; ++i) {
    const auto g = generalize_action(agent, rng);
    REQUIRE(g.has_value());
    CHECK(g->contains(lowest));
  }
  Agent empty = make_agent(1, t, Strategy{true, false}, BehaviorParams{}, net);
  CHECK_THROWS(generalize_action(empty, rng));
}

TEST_CASE("generalization with a single item keeps the rule") {
  const auto& t = default_task_tree();
  Agent agent = make_agent(0, t, Strategy{true, false}, BehaviorParams{}, EmbeddingNetd(184, 2, 2));
  const ItemId only = t.basic_items()[0];
  agent.inventory = Inventory(t.size(), std::vector<ItemId>{only});
  agent.success_memory.push_back({Combination{only, only}, 99});
  Rng rng = make_stream(1, 1);
  CHECK(generalize_action(agent, rng) == Combination{only, only});
}

TEST_CASE("execute attempt") {
  const auto& t = default_task_tree();
  const auto& r = basic_recipe(t);
  Agent agent = random_agent(0, t);
  const AgentContext ctx{&t};
  const auto inv_before = agent.inventory.size();

  const auto first = execute_attempt(agent, ctx, r.ingredients, 1.5);
  CHECK(first.success());
  CHECK(first.outcome == r.product);
  CHECK(first.t == 1.5);
  CHECK(agent.inventory.size() == inv_before + 1);
  CHECK(agent.score == item_score(t, r.product));
  CHECK(first.score_after == agent.score);
  CHECK(agent.success_memory.size() == 1);

  const auto again = execute_attempt(agent, ctx, r.ingredients);
  CHECK(again.repeated);
  CHECK(agent.inventory.size() == inv_before + 1);
  CHECK(agent.score == item_score(t, r.product));
  CHECK(agent.success_memory.size() == 1);

  const ItemId b0 = t.basic_items()[0];
  const auto miss = execute_attempt(agent, ctx, Combination{b0, b0, b0});
  CHECK_FALSE(miss.outcome.has_value());
  CHECK(agent.attempt_memory.size() == 2);
  CHECK(agent.score == item_score(t, r.product));

  CHECK_THROWS(execute_attempt(agent, ctx, Combination{183}));
}

TEST_CASE("semantic agents buffer training pairs on success") {
  const auto& t = default_task_tree();
  const auto& r = basic_recipe(t);
  Agent agent = make_agent(0, t, Strategy{true, false}, BehaviorParams{}, init_net(184, 4, 4, 1));
  const AgentContext ctx{&t};
  execute_attempt(agent, ctx, r.ingredients);
  CHECK(agent.pending_pairs == pairs_from_combination(r.ingredients));
  Agent plain = random_agent(1, t);
  execute_attempt(plain, ctx, r.ingredients);
  CHECK(plain.pending_pairs.empty());
}

TEST_CASE("social learning copies from the best other individual") {
  const auto& t = default_task_tree();
  const auto& r = basic_recipe(t);
  const AgentContext ctx{&t};
  std::vector<Agent> pop{random_agent(0, t, true), random_agent(1, t, true)};
  execute_attempt(pop[1], ctx, r.ingredients);
  Rng rng = make_stream(1, 1);

  const auto ev = social_learn(pop, 0, ctx, rng);
  CHECK(ev.kind == EventKind::SocialCopy);
  CHECK(ev.outcome == r.product);
  CHECK(ev.target == 1);
  CHECK(ev.combination == r.ingredients.to_vector());
  CHECK(pop[0].inventory.contains(r.product));
  CHECK(pop[0].score == item_score(t, r.product));
  CHECK(pop[0].success_memory.size() == 1);

  const auto noop = social_learn(pop, 0, ctx, rng);
  CHECK(noop.kind == EventKind::SocialNoop);
  CHECK(pop[0].score == item_score(t, r.product));

  std::vector<Agent> single{random_agent(0, t, true)};
  CHECK_THROWS(social_learn(single, 0, ctx, rng));
}

TEST_CASE("the best individual copies from the runner-up") {
  const auto& t = default_task_tree();
  std::vector<Agent> pop{random_agent(0, t, true), random_agent(1, t, true), random_agent(2, t, true)};
  pop[0].score = 50;
  pop[1].score = 10;
  pop[2].score = 30;
  CHECK(best_demonstrator(pop, 0) == 2u);
  CHECK(best_demonstrator(pop, 2) == 0u);
  pop[1].score = 30;
  CHECK(best_demonstrator(pop, 0) == 1u);  // tie -> lowest id
}

TEST_CASE("a static demonstrator with k novel items yields exactly k copies") {
  const auto& t = default_task_tree();
  const AgentContext ctx{&t};
  Rng rng = make_stream(9, 9);
  // Give the demonstrator several items straight from the recipe table.
  std::vector<Agent> pop{random_agent(0, t, true), random_agent(1, t, true)};
  int k = 0;
  for (const auto& r : t.recipes()) {
    if (t.item(r.product).level > 3) continue;
    pop[1].inventory.add(r.product);
    ++k;
  }
  pop[1].score = 1000000;
  int productive = 0;
  for (int i = 0; i < k + 5; ++i) {
    const auto ev = social_learn(pop, 0, ctx, rng);
    if (ev.kind == EventKind::SocialCopy) {
      ++productive;
      CHECK(i < k);
    }
  }
  CHECK(productive == k);
  CHECK(pop[0].inventory == pop[1].inventory);
}

TEST_CASE("inventory and score never decrease") {
  const auto& t = default_task_tree();
  AgentContext ctx{&t};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_stream(seed, 5);
    Agent agent = make_agent(0, t, Strategy{true, false}, BehaviorParams{}, init_net(184, 8, 8, seed));
    std::size_t inv = agent.inventory.size();
    std::int64_t score = 0;
    for (int i = 0; i < 2000; ++i) {
      const auto choice = choose_individual_action(agent, ctx, rng);
      execute_attempt(agent, ctx, choice.combination);
      if (!agent.pending_pairs.empty() && i % 50 == 0) {
        train<double>(*agent.net, agent.pending_pairs, 1, 0.05);
        agent.pending_pairs.clear();
      }
      CHECK(agent.inventory.size() >= inv);
      CHECK(agent.score >= score);
      inv = agent.inventory.size();
      score = agent.score;
    }
    CHECK(agent.success_memory.size() <= agent.attempt_memory.size());
    for (const auto& [c, p] : agent.success_memory) CHECK(agent.attempt_memory.contains(c));
    std::int64_t expected = 0;
    for (ItemId id : agent.inventory.items()) expected += item_score(t, id);
    CHECK(agent.score == expected);
  }
}

TEST_CASE("solo bot follows the n-then-items distribution") {
  const auto& t = default_task_tree();
  const Inventory inv(t.size(), t.basic_items());
  Rng rng = make_stream(11, 0);
  std::map<Combination, std::size_t> counts;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) counts[std::get<Combination>(bot_choose_action(inv, nullptr, rng))]++;
  const std::vector<ItemId> items(t.basic_items().begin(), t.basic_items().end());
  const auto p = n_then_items_distribution(items);
  CHECK(chi_square_against(counts, p, n) < kChi2Crit82);
  double exact = 0;
  for (const auto& [c, q] : p) exact -= q * std::log(q);
  CHECK(std::abs(entropy_of(counts, n) - exact) < 0.05);
}

TEST_CASE("group bot copies before exploring") {
  const auto& t = default_task_tree();
  const Inventory bot(t.size(), t.basic_items());
  Inventory leader(t.size(), t.basic_items());
  Rng rng = make_stream(1, 0);
  CHECK(std::holds_alternative<Combination>(bot_choose_action(bot, &leader, rng)));
  leader.add(basic_recipe(t).product);
  const auto d = bot_choose_action(bot, &leader, rng);
  REQUIRE(std::holds_alternative<BotCopy>(d));
  CHECK(std::get<BotCopy>(d).item == basic_recipe(t).product);
}

}
