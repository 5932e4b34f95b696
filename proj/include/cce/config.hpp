#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cce/agent.hpp"
#include "cce/task_tree.hpp"

namespace cce {

/// Thrown with every validation problem found, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class MortalitySign { Increasing, Verbatim };

struct MortalityParams {
  double a = 0.0001365;
  double b = 0.2097;
  MortalitySign sign = MortalitySign::Increasing;
};

enum class InheritanceMode { KnowledgeOnly, KnowledgePlusItems };

struct InheritanceParams {
  InheritanceMode mode = InheritanceMode::KnowledgeOnly;
  double loss_prob = 0.0;
};

struct TaskSource {
  /// "default" or a path to a task-tree JSON file.
  std::string source = "default";
  /// "none", "shuffle_rules" or "resize".
  std::string variant = "none";
  std::vector<int> level_sizes;
  std::uint64_t seed = 0;
};

struct SimConfig {
  int population_size = 100;
  int generations = 150;
  int n_attempt = 10;
  BehaviorParams behavior;
  /// Initial fractions indexed by Strategy::index().
  std::array<double, kStrategyCount> strategy_mix{1.0, 0.0, 0.0, 0.0};
  MortalityParams mortality;
  InheritanceParams inheritance;
  double transmission_noise_sd = 0.0;
  bool train_on_observation = true;
  bool pairs_include_product = false;
  int embed_dim = 16;
  int hidden_dim = 16;
  double learning_rate = 0.05;
  int train_epochs = 10;
  PredictMode predict_mode = PredictMode::Sample;
  double score_base = 2.0;
  TaskSource task;
  std::uint64_t seed = 1;
  int replicates = 1;
  /// Trailing generations whose attempt events are kept in the trajectory.
  int action_log_generations = 10;
  bool export_similarity = false;
};

/// Parses and validates; unknown keys and every invalid field are reported together.
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& cfg);
/// Throws ConfigError listing all problems.
void validate(const SimConfig& cfg);

/// Task tree named by the config's task source (default, file, or variant).
TaskTree build_task_tree(const SimConfig& cfg);

/// Per-strategy head counts for `n` individuals, largest remainder rounding.
std::array<int, kStrategyCount> strategy_counts(const std::array<double, kStrategyCount>& mix, int n);

}  // namespace cce
