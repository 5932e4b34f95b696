#include "cce/agent.hpp"

#include <stdexcept>

namespace cce {

std::string Strategy::name() const {
  return std::string(semantic ? "semantic" : "random") + (social ? "_social" : "_individual");
}

Strategy strategy_from_name(const std::string& name) {
  for (int i = 0; i < kStrategyCount; ++i) {
    if (Strategy::from_index(i).name() == name) return Strategy::from_index(i);
  }
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

BehaviorParams BehaviorParams::for_strategy(Strategy s) const {
  BehaviorParams out = *this;
  if (!s.social) out.p_sl = 0;
  if (!s.semantic) {
    out.p_s = 0;
    out.p_g = 0;
  }
  return out;
}

Agent make_agent(int id, const TaskTree& tree, Strategy strategy, const BehaviorParams& params,
                 std::optional<EmbeddingNetd> net) {
  if (strategy.semantic != net.has_value()) throw std::invalid_argument("agent net must be present iff the strategy is semantic");
  Agent a;
  a.id = id;
  a.inventory = Inventory(tree.size(), tree.basic_items());
  a.strategy = strategy;
  a.params = params.for_strategy(strategy);
  a.net = std::move(net);
  return a;
}

Combination random_combination(std::span<const ItemId> items, Rng& rng, std::optional<int> forced_size) {
  if (items.empty()) throw std::invalid_argument("cannot draw a combination from an empty inventory");
  const int n = forced_size ? *forced_size : 1 + static_cast<int>(uniform_index(rng, 3));
  std::array<ItemId, Combination::kMaxSize> picked{};
  for (int i = 0; i < n; ++i) picked[i] = items[uniform_index(rng, items.size())];
  return Combination(std::span<const ItemId>(picked.data(), static_cast<std::size_t>(n)));
}

std::optional<Combination> generalize_action(const Agent& agent, Rng& rng) {
  if (agent.success_memory.empty()) throw std::invalid_argument("generalization needs a remembered success");
  if (!agent.net) throw std::invalid_argument("generalization needs a semantic model");
  const auto& rule = agent.success_memory[uniform_index(rng, agent.success_memory.size())].first;
  const std::size_t position = uniform_index(rng, rule.size());
  const ItemId replaced = rule[position];

  const auto& emb = agent.net->embeddings();
  std::optional<ItemId> best;
  double best_sim = 0;
  for (ItemId cand : agent.inventory.items()) {
    if (cand == replaced) continue;
    const double s = cosine(emb.row(replaced), emb.row(cand));
    if (!best || s > best_sim || (s == best_sim && cand < *best)) {
      best = cand;
      best_sim = s;
    }
  }
  if (!best) return rule;
  Combination out = rule.with_replaced(position, *best);
  if (!agent.inventory.contains_all(out)) return std::nullopt;
  return out;
}

ActionChoice choose_individual_action(const Agent& agent, const AgentContext& ctx, Rng& rng, std::optional<int> forced_size) {
  const auto items = agent.inventory.items();
  if (items.empty()) throw std::invalid_argument("agent inventory is empty");
  const int n = forced_size ? *forced_size : 1 + static_cast<int>(uniform_index(rng, 3));
  if (!agent.net || !bernoulli(rng, agent.params.p_s)) {
    return {random_combination(items, rng, n), ActionPath::Random};
  }
  if (!agent.success_memory.empty() && bernoulli(rng, agent.params.p_g)) {
    if (auto g = generalize_action(agent, rng)) return {*g, ActionPath::Generalize};
  }
  std::array<ItemId, Combination::kMaxSize> picked{};
  picked[0] = items[uniform_index(rng, items.size())];
  if (n > 1) picked[1] = predict_partner(*agent.net, picked[0], items, ctx.predict_mode, rng);
  if (n > 2) picked[2] = predict_partner(*agent.net, picked[1], items, ctx.predict_mode, rng);
  return {Combination(std::span<const ItemId>(picked.data(), static_cast<std::size_t>(n))), ActionPath::Predict};
}

AttemptEvent execute_attempt(Agent& agent, const AgentContext& ctx, const Combination& c, double t) {
  if (!agent.inventory.contains_all(c)) {
    throw std::invalid_argument("agent " + std::to_string(agent.id) + " does not own every item of " + to_string(c));
  }
  AttemptEvent ev;
  ev.t = t;
  ev.actor_id = agent.id;
  ev.kind = EventKind::Attempt;
  ev.combination = c.to_vector();
  ev.state_hash = agent.inventory.state_hash();
  if (agent.attempt_memory.contains(c)) {
    ev.repeated = true;
    ev.outcome = ctx.tree->find_recipe(c);
    ev.score_after = agent.score;
    return ev;
  }
  agent.attempt_memory.insert(c);
  ev.outcome = resolve_attempt(*ctx.tree, c);
  if (ev.outcome) {
    if (agent.inventory.add(*ev.outcome)) agent.score += item_score(*ctx.tree, *ev.outcome, ctx.score_base);
    agent.success_memory.emplace_back(c, *ev.outcome);
    if (agent.net) {
      auto pairs = pairs_from_combination(c, ev.outcome, ctx.pairs_include_product);
      agent.pending_pairs.insert(agent.pending_pairs.end(), pairs.begin(), pairs.end());
    }
  }
  ev.score_after = agent.score;
  return ev;
}

std::optional<std::size_t> best_demonstrator(std::span<const Agent> population, std::size_t self) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (i == self) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = population[i];
    const auto& b = population[*best];
    if (a.score > b.score || (a.score == b.score && a.id < b.id)) best = i;
  }
  return best;
}

AttemptEvent social_learn(std::span<Agent> population, std::size_t self, const AgentContext& ctx, Rng& rng, double t) {
  if (population.size() < 2) throw std::invalid_argument("social learning needs at least two individuals");
  Agent& learner = population[self];
  const std::size_t demo_index = *best_demonstrator(population, self);
  const Agent& demo = population[demo_index];

  AttemptEvent ev;
  ev.t = t;
  ev.actor_id = learner.id;
  ev.state_hash = learner.inventory.state_hash();
  ev.target = demo.id;

  std::vector<ItemId> novel;
  for (ItemId id : demo.inventory.items()) {
    if (!learner.inventory.contains(id)) novel.push_back(id);
  }
  if (novel.empty()) {
    ev.kind = EventKind::SocialNoop;
    ev.score_after = learner.score;
    return ev;
  }
  const ItemId item = novel[uniform_index(rng, novel.size())];
  learner.inventory.add(item);
  learner.score += item_score(*ctx.tree, item, ctx.score_base);
  ev.kind = EventKind::SocialCopy;
  ev.outcome = item;
  if (auto recipe = ctx.tree->recipe_for(item)) {
    ev.combination = recipe->to_vector();
    learner.attempt_memory.insert(*recipe);
    learner.success_memory.emplace_back(*recipe, item);
    if (learner.net && ctx.train_on_observation) {
      auto pairs = pairs_from_combination(*recipe, item, ctx.pairs_include_product);
      learner.pending_pairs.insert(learner.pending_pairs.end(), pairs.begin(), pairs.end());
    }
  }
  ev.score_after = learner.score;
  return ev;
}

BotDecision bot_choose_action(const Inventory& bot, const Inventory* leader, Rng& rng) {
  if (leader) {
    std::vector<ItemId> novel;
    for (ItemId id : leader->items()) {
      if (!bot.contains(id)) novel.push_back(id);
    }
    if (!novel.empty()) return BotCopy{novel[uniform_index(rng, novel.size())]};
  }
  return random_combination(bot.items(), rng);
}

}  // namespace cce
