#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "cce/combination.hpp"
#include "cce/embedding_net.hpp"
#include "cce/events.hpp"
#include "cce/rng.hpp"
#include "cce/task_tree.hpp"

namespace cce {

struct Strategy {
  bool semantic = false;
  bool social = false;

  /// 0 semantic_social, 1 semantic_individual, 2 random_social, 3 random_individual.
  int index() const { return (semantic ? 0 : 2) + (social ? 0 : 1); }
  static Strategy from_index(int i) { return {i < 2, i % 2 == 0}; }
  std::string name() const;
  friend bool operator==(const Strategy&, const Strategy&) = default;
};

inline constexpr int kStrategyCount = 4;
Strategy strategy_from_name(const std::string& name);

struct BehaviorParams {
  double p_sl = 0.5;
  double p_s = 0.9;
  double p_g = 0.1;
  int semantic_cost = 1;

  /// Zeroes the probabilities a strategy lacks the capacity for.
  BehaviorParams for_strategy(Strategy s) const;
};

/// Fixed inputs an agent's decisions depend on besides its own state.
struct AgentContext {
  const TaskTree* tree = nullptr;
  double score_base = 2.0;
  PredictMode predict_mode = PredictMode::Sample;
  bool train_on_observation = true;
  bool pairs_include_product = false;
};

struct Agent {
  int id = 0;
  int age = 0;
  std::int64_t score = 0;
  Inventory inventory;
  std::unordered_set<Combination, CombinationHash> attempt_memory;
  std::vector<std::pair<Combination, ItemId>> success_memory;
  Strategy strategy;
  BehaviorParams params;
  /// Present iff strategy.semantic.
  std::optional<EmbeddingNetd> net;
  std::vector<TrainingPair> pending_pairs;
};

/// Naive agent: basic inventory, empty memories, parameters gated by strategy.
Agent make_agent(int id, const TaskTree& tree, Strategy strategy, const BehaviorParams& params,
                 std::optional<EmbeddingNetd> net);

enum class ActionPath { Random, Predict, Generalize };

struct ActionChoice {
  Combination combination;
  ActionPath path = ActionPath::Random;
  bool semantic() const { return path != ActionPath::Random; }
};

/// Individual innovation attempt selection: random with probability 1 - p_s,
/// otherwise semantic prediction, or generalization with probability p_g.
ActionChoice choose_individual_action(const Agent& agent, const AgentContext& ctx, Rng& rng,
                                      std::optional<int> forced_size = std::nullopt);

/// Substitutes one item of a remembered successful rule with its nearest
/// embedding neighbour in the inventory. nullopt when the result would use
/// items the agent does not own.
std::optional<Combination> generalize_action(const Agent& agent, Rng& rng);

/// Resolves `c`, updating memory, inventory, score and the training buffer.
AttemptEvent execute_attempt(Agent& agent, const AgentContext& ctx, const Combination& c, double t = 0);

/// Index of the highest-scoring member other than `self` (ties -> lowest id).
std::optional<std::size_t> best_demonstrator(std::span<const Agent> population, std::size_t self);

/// Success-biased copying of one item the best demonstrator owns and the learner lacks.
AttemptEvent social_learn(std::span<Agent> population, std::size_t self, const AgentContext& ctx, Rng& rng, double t = 0);

/// n uniform in {1,2,3}, then n items uniform with replacement.
Combination random_combination(std::span<const ItemId> items, Rng& rng, std::optional<int> forced_size = std::nullopt);

struct BotCopy {
  ItemId item;
};
using BotDecision = std::variant<BotCopy, Combination>;

/// Random bot step. When `leader` is given (group play), copies an item the
/// leader owns that the bot lacks; otherwise draws a random combination.
BotDecision bot_choose_action(const Inventory& bot, const Inventory* leader, Rng& rng);

}  // namespace cce
