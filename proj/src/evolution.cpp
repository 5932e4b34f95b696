#include "cce/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace cce {

using nlohmann::json;

double death_probability(double age, double a, double b, MortalitySign sign) {
  if (age < 0) throw std::invalid_argument("age must be non-negative");
  const double p = sign == MortalitySign::Increasing ? a * std::exp(b * age) : a * std::exp(-b * age);
  return std::clamp(p, 0.0, 1.0);
}

namespace {

EmbeddingNetd fresh_net(const World& w, Rng& rng) {
  return init_net<double>(static_cast<Eigen::Index>(w.tree->size()), w.cfg.embed_dim, w.cfg.hidden_dim, rng());
}

Agent naive_agent(World& w, Strategy s) {
  std::optional<EmbeddingNetd> net;
  if (s.semantic) net = fresh_net(w, w.rng);
  return make_agent(w.next_id++, *w.tree, s, w.cfg.behavior, std::move(net));
}

void add_naive_population(World& w, Population& pop, int n) {
  const auto counts = strategy_counts(w.cfg.strategy_mix, n);
  for (int s = 0; s < kStrategyCount; ++s) {
    for (int k = 0; k < counts[s]; ++k) pop.push_back(naive_agent(w, Strategy::from_index(s)));
  }
}

GenerationRecord snapshot(const World& w, int generation) {
  GenerationRecord rec;
  rec.generation = generation;
  std::vector<char> instant(w.tree->size(), 0);
  double total = 0;
  for (const auto& a : w.population) {
    rec.agents.push_back({a.id, a.score, static_cast<int>(a.inventory.size()), a.strategy, a.age});
    ++rec.strategy_counts[a.strategy.index()];
    total += static_cast<double>(a.score);
    for (ItemId id : a.inventory.items()) instant[id] = 1;
  }
  rec.repertoire_instant = static_cast<int>(std::count(instant.begin(), instant.end(), 1));
  rec.repertoire_cumulative = static_cast<int>(std::count(w.ever_found.begin(), w.ever_found.end(), 1));
  rec.mean_score = w.population.empty() ? 0.0 : total / static_cast<double>(w.population.size());
  return rec;
}

void note_found(World& w) {
  for (const auto& a : w.population) {
    for (ItemId id : a.inventory.items()) w.ever_found[id] = 1;
  }
}

}  // namespace

World make_world(const TaskTree& tree, const SimConfig& cfg, std::uint64_t replicate) {
  validate(cfg);
  World w;
  w.tree = &tree;
  w.cfg = cfg;
  w.ctx = AgentContext{&tree, cfg.score_base, cfg.predict_mode, cfg.train_on_observation, cfg.pairs_include_product};
  w.rng = make_stream(cfg.seed, replicate);
  w.ever_found.assign(tree.size(), 0);
  add_naive_population(w, w.population, cfg.population_size);
  note_found(w);
  return w;
}

Population apply_mortality(Population population, const SimConfig& cfg, Rng& rng) {
  Population survivors;
  survivors.reserve(population.size());
  for (auto& a : population) {
    const double p = death_probability(a.age, cfg.mortality.a, cfg.mortality.b, cfg.mortality.sign);
    if (!bernoulli(rng, p)) survivors.push_back(std::move(a));
  }
  return survivors;
}

Population select_and_reproduce(Population survivors, World& w, ReproductionStats* stats) {
  const int target = w.cfg.population_size;
  ReproductionStats local;
  for (auto& a : survivors) ++a.age;
  if (survivors.empty()) {
    local.extinction = true;
    add_naive_population(w, survivors, target);
    local.births = target;
    if (stats) *stats = local;
    return survivors;
  }
  const std::size_t parents = survivors.size();
  std::vector<double> weights(parents);
  for (std::size_t i = 0; i < parents; ++i) weights[i] = static_cast<double>(survivors[i].score) + 1.0;
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  const int vacancies = target - static_cast<int>(parents);
  for (int k = 0; k < vacancies; ++k) {
    const Agent& parent = survivors[pick(w.rng)];
    std::optional<EmbeddingNetd> net;
    if (parent.net) net = perturb_net(*parent.net, w.cfg.transmission_noise_sd, w.rng);
    Agent child = make_agent(w.next_id++, *w.tree, parent.strategy, w.cfg.behavior, std::move(net));
    if (w.cfg.inheritance.mode == InheritanceMode::KnowledgePlusItems) {
      for (ItemId id : parent.inventory.items()) {
        if (!child.inventory.contains(id) && bernoulli(w.rng, 1.0 - w.cfg.inheritance.loss_prob)) child.inventory.add(id);
      }
    }
    survivors.push_back(std::move(child));
    ++local.births;
  }
  if (stats) *stats = local;
  return survivors;
}

GenerationRecord run_generation(World& w, bool keep_actions) {
  const int generation = w.generation + 1;
  const int slots = w.cfg.n_attempt;
  std::vector<AttemptEvent> actions;
  auto& pop = w.population;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    int slot = 0;
    while (slot < slots) {
      const double t = static_cast<double>(w.generation) * slots + slot;
      AttemptEvent ev;
      if (bernoulli(w.rng, pop[i].params.p_sl)) {
        ev = social_learn(pop, i, w.ctx, w.rng, t);
        slot += 1;
      } else {
        const auto choice = choose_individual_action(pop[i], w.ctx, w.rng);
        ev = execute_attempt(pop[i], w.ctx, choice.combination, t);
        slot += choice.semantic() ? pop[i].params.semantic_cost : 1;
      }
      if (keep_actions) actions.push_back(std::move(ev));
    }
  }

  for (auto& a : pop) {
    if (a.net && !a.pending_pairs.empty() && w.cfg.train_epochs > 0) {
      train<double>(*a.net, a.pending_pairs, w.cfg.train_epochs, w.cfg.learning_rate);
    }
    a.pending_pairs.clear();
  }

  note_found(w);
  GenerationRecord rec = snapshot(w, generation);
  rec.actions = std::move(actions);

  Population survivors = apply_mortality(std::move(pop), w.cfg, w.rng);
  rec.deaths = w.cfg.population_size - static_cast<int>(survivors.size());
  ReproductionStats stats;
  w.population = select_and_reproduce(std::move(survivors), w, &stats);
  rec.births = stats.births;
  rec.extinction = stats.extinction;
  w.generation = generation;
  return rec;
}

Trajectory run_replicate(const TaskTree& tree, const SimConfig& cfg, int replicate) {
  World w = make_world(tree, cfg, static_cast<std::uint64_t>(replicate));
  Trajectory t;
  t.config = config_to_json(cfg);
  t.replicate = replicate;
  t.records.reserve(static_cast<std::size_t>(cfg.generations) + 1);
  t.records.push_back(snapshot(w, 0));
  for (int g = 1; g <= cfg.generations; ++g) {
    const bool keep = g > cfg.generations - cfg.action_log_generations;
    t.records.push_back(run_generation(w, keep));
  }
  if (cfg.export_similarity) {
    const Agent* best = nullptr;
    for (const auto& a : w.population) {
      if (a.net && (!best || a.score > best->score)) best = &a;
    }
    if (best) {
      LabeledMatrix m;
      for (const auto& it : tree.items()) m.labels.push_back(it.name);
      m.values = export_similarity_matrix(*best->net);
      t.final_similarity = std::move(m);
    }
  }
  return t;
}

std::vector<Trajectory> run_simulation(const SimConfig& cfg, int jobs) {
  validate(cfg);
  const TaskTree tree = build_task_tree(cfg);
  std::vector<Trajectory> out(static_cast<std::size_t>(cfg.replicates));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int r = next++; r < cfg.replicates; r = next++) {
      try {
        out[r] = run_replicate(tree, cfg, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min(jobs, cfg.replicates));
  std::vector<std::thread> threads;
  for (int k = 1; k < n; ++k) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

json to_json(const GenerationRecord& r) {
  json j;
  j["generation"] = r.generation;
  j["repertoire_instant"] = r.repertoire_instant;
  j["repertoire_cumulative"] = r.repertoire_cumulative;
  j["mean_score"] = r.mean_score;
  json counts = json::object();
  for (int i = 0; i < kStrategyCount; ++i) counts[Strategy::from_index(i).name()] = r.strategy_counts[i];
  j["strategy_counts"] = counts;
  j["deaths"] = r.deaths;
  j["births"] = r.births;
  j["extinction"] = r.extinction;
  json agents = json::array();
  for (const auto& a : r.agents) {
    agents.push_back({{"id", a.id}, {"score", a.score}, {"inventory_size", a.inventory_size}, {"strategy", a.strategy.name()}, {"age", a.age}});
  }
  j["agents"] = std::move(agents);
  json actions = json::array();
  for (const auto& e : r.actions) actions.push_back(to_json(e));
  j["actions"] = std::move(actions);
  return j;
}

GenerationRecord generation_record_from_json(const json& j) {
  GenerationRecord r;
  r.generation = j.at("generation").get<int>();
  r.repertoire_instant = j.at("repertoire_instant").get<int>();
  r.repertoire_cumulative = j.at("repertoire_cumulative").get<int>();
  r.mean_score = j.at("mean_score").get<double>();
  for (int i = 0; i < kStrategyCount; ++i) r.strategy_counts[i] = j.at("strategy_counts").at(Strategy::from_index(i).name()).get<int>();
  r.deaths = j.at("deaths").get<int>();
  r.births = j.at("births").get<int>();
  r.extinction = j.at("extinction").get<bool>();
  for (const auto& a : j.at("agents")) {
    r.agents.push_back({a.at("id").get<int>(), a.at("score").get<std::int64_t>(), a.at("inventory_size").get<int>(),
                        strategy_from_name(a.at("strategy").get<std::string>()), a.at("age").get<int>()});
  }
  for (const auto& e : j.at("actions")) r.actions.push_back(event_from_json(e));
  return r;
}

std::string trajectory_jsonl(const Trajectory& t) {
  std::string out;
  for (const auto& r : t.records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string summary_csv_header() {
  std::string h = "replicate,generation,repertoire_instant,repertoire_cumulative,mean_score";
  for (int i = 0; i < kStrategyCount; ++i) h += "," + Strategy::from_index(i).name();
  return h + "\n";
}

std::string summary_csv_rows(const Trajectory& t) {
  std::string out;
  char buf[256];
  for (const auto& r : t.records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.6f,%d,%d,%d,%d\n", t.replicate, r.generation, r.repertoire_instant,
                  r.repertoire_cumulative, r.mean_score, r.strategy_counts[0], r.strategy_counts[1], r.strategy_counts[2],
                  r.strategy_counts[3]);
    out += buf;
  }
  return out;
}

}  // namespace cce
