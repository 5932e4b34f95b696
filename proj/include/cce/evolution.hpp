#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cce/agent.hpp"
#include "cce/config.hpp"
#include "cce/events.hpp"
#include "cce/similarity_io.hpp"
#include "cce/task_tree.hpp"

namespace cce {

double death_probability(double age, double a, double b, MortalitySign sign);

using Population = std::vector<Agent>;

/// Simulation state of one replicate between generations.
struct World {
  const TaskTree* tree = nullptr;
  SimConfig cfg;
  AgentContext ctx;
  Population population;
  Rng rng;
  int next_id = 0;
  std::vector<char> ever_found;
  int generation = 0;

  AgentContext context() const { return ctx; }
};

World make_world(const TaskTree& tree, const SimConfig& cfg, std::uint64_t replicate);

/// Independent death draws; returns the survivors in their original order.
Population apply_mortality(Population population, const SimConfig& cfg, Rng& rng);

struct ReproductionStats {
  int births = 0;
  bool extinction = false;
};

/// Survivors persist (age + 1); vacancies are filled with offspring of
/// parents sampled proportionally to score + 1.
Population select_and_reproduce(Population survivors, World& world, ReproductionStats* stats = nullptr);

struct AgentSnapshot {
  int id = 0;
  std::int64_t score = 0;
  int inventory_size = 0;
  Strategy strategy;
  int age = 0;
};

struct GenerationRecord {
  int generation = 0;
  std::vector<AgentSnapshot> agents;
  int repertoire_instant = 0;
  int repertoire_cumulative = 0;
  double mean_score = 0;
  std::array<int, kStrategyCount> strategy_counts{};
  int deaths = 0;
  int births = 0;
  bool extinction = false;
  std::vector<AttemptEvent> actions;
};

nlohmann::json to_json(const GenerationRecord& r);
GenerationRecord generation_record_from_json(const nlohmann::json& j);

struct Trajectory {
  nlohmann::json config;
  int replicate = 0;
  /// Initial state followed by one record per generation.
  std::vector<GenerationRecord> records;
  std::optional<LabeledMatrix> final_similarity;
};

/// One generation: attempts, model updates, mortality, reproduction.
GenerationRecord run_generation(World& world, bool keep_actions);

Trajectory run_replicate(const TaskTree& tree, const SimConfig& cfg, int replicate);
/// All replicates; `jobs` worker threads, results ordered by replicate index.
std::vector<Trajectory> run_simulation(const SimConfig& cfg, int jobs = 1);

std::string trajectory_jsonl(const Trajectory& t);
std::string summary_csv_header();
std::string summary_csv_rows(const Trajectory& t);

}  // namespace cce
