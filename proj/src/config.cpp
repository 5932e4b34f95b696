#include "cce/config.hpp"

#include <cmath>
#include <numeric>
#include <set>

namespace cce {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

/// Reads typed fields from one JSON object, collecting every problem.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string prefix, std::vector<std::string>& problems, std::set<std::string> known)
      : obj_(obj), prefix_(std::move(prefix)), problems_(problems) {
    if (!obj.is_object()) {
      problems_.push_back(label("") + " must be an object");
      ok_ = false;
      return;
    }
    for (const auto& [key, _] : obj.items()) {
      if (!known.contains(key)) problems_.push_back("unknown key '" + label(key) + "'");
    }
  }

  bool ok() const { return ok_; }

  template <typename T>
  void read(const char* key, T& out) {
    if (!ok_ || !obj_.contains(key)) return;
    const json& v = obj_[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return bad(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return bad(key, "an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) {
          out = v.get<T>();
          return;
        }
        if (v.get<long long>() < 0) return bad(key, "a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return bad(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return bad(key, "a string");
    }
    out = v.get<T>();
  }

  const json* child(const char* key) const {
    if (!ok_ || !obj_.contains(key)) return nullptr;
    return &obj_[key];
  }

  std::string label(const std::string& key) const { return prefix_.empty() ? key : (key.empty() ? prefix_ : prefix_ + "." + key); }

 private:
  void bad(const char* key, const char* what) { problems_.push_back("field '" + label(key) + "' must be " + what); }

  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& problems_;
  bool ok_ = true;
};

void check_probability(std::vector<std::string>& problems, const char* name, double p) {
  if (!(p >= 0.0 && p <= 1.0)) problems.push_back("field '" + std::string(name) + "' must lie in [0, 1], got " + std::to_string(p));
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

SimConfig config_from_json(const json& j) {
  std::vector<std::string> problems;
  SimConfig cfg;
  FieldReader r(j, "", problems,
                {"population_size", "generations", "n_attempt", "p_sl", "p_s", "p_g", "semantic_cost", "strategy_mix",
                 "mortality", "inheritance", "transmission_noise_sd", "train_on_observation", "pairs_include_product",
                 "embed_dim", "hidden_dim", "learning_rate", "train_epochs", "predict_mode", "score_base", "task", "seed",
                 "replicates", "action_log_generations", "export_similarity"});
  if (!r.ok()) throw ConfigError(problems);
  r.read("population_size", cfg.population_size);
  r.read("generations", cfg.generations);
  r.read("n_attempt", cfg.n_attempt);
  r.read("p_sl", cfg.behavior.p_sl);
  r.read("p_s", cfg.behavior.p_s);
  r.read("p_g", cfg.behavior.p_g);
  r.read("semantic_cost", cfg.behavior.semantic_cost);
  r.read("transmission_noise_sd", cfg.transmission_noise_sd);
  r.read("train_on_observation", cfg.train_on_observation);
  r.read("pairs_include_product", cfg.pairs_include_product);
  r.read("embed_dim", cfg.embed_dim);
  r.read("hidden_dim", cfg.hidden_dim);
  r.read("learning_rate", cfg.learning_rate);
  r.read("train_epochs", cfg.train_epochs);
  r.read("score_base", cfg.score_base);
  r.read("seed", cfg.seed);
  r.read("replicates", cfg.replicates);
  r.read("action_log_generations", cfg.action_log_generations);
  r.read("export_similarity", cfg.export_similarity);

  std::string predict = "sample";
  r.read("predict_mode", predict);
  if (predict == "sample") cfg.predict_mode = PredictMode::Sample;
  else if (predict == "argmax") cfg.predict_mode = PredictMode::Argmax;
  else problems.push_back("field 'predict_mode' must be \"sample\" or \"argmax\"");

  if (const json* mix = r.child("strategy_mix")) {
    std::set<std::string> names;
    for (int i = 0; i < kStrategyCount; ++i) names.insert(Strategy::from_index(i).name());
    FieldReader m(*mix, "strategy_mix", problems, names);
    cfg.strategy_mix.fill(0.0);
    for (int i = 0; i < kStrategyCount; ++i) m.read(Strategy::from_index(i).name().c_str(), cfg.strategy_mix[i]);
  }
  if (const json* mort = r.child("mortality")) {
    FieldReader m(*mort, "mortality", problems, {"a", "b", "sign"});
    m.read("a", cfg.mortality.a);
    m.read("b", cfg.mortality.b);
    std::string sign = "increasing";
    m.read("sign", sign);
    if (sign == "increasing") cfg.mortality.sign = MortalitySign::Increasing;
    else if (sign == "verbatim") cfg.mortality.sign = MortalitySign::Verbatim;
    else problems.push_back("field 'mortality.sign' must be \"increasing\" or \"verbatim\"");
  }
  if (const json* inh = r.child("inheritance")) {
    FieldReader m(*inh, "inheritance", problems, {"mode", "loss_prob"});
    std::string mode = "knowledge_only";
    m.read("mode", mode);
    if (mode == "knowledge_only") cfg.inheritance.mode = InheritanceMode::KnowledgeOnly;
    else if (mode == "knowledge_plus_items") cfg.inheritance.mode = InheritanceMode::KnowledgePlusItems;
    else problems.push_back("field 'inheritance.mode' must be \"knowledge_only\" or \"knowledge_plus_items\"");
    m.read("loss_prob", cfg.inheritance.loss_prob);
  }
  if (const json* task = r.child("task")) {
    FieldReader m(*task, "task", problems, {"source", "variant", "level_sizes", "seed"});
    m.read("source", cfg.task.source);
    m.read("variant", cfg.task.variant);
    m.read("seed", cfg.task.seed);
    if (const json* ls = m.child("level_sizes")) {
      if (!ls->is_array()) {
        problems.push_back("field 'task.level_sizes' must be an array of integers");
      } else {
        for (const auto& v : *ls) {
          if (!v.is_number_integer()) {
            problems.push_back("field 'task.level_sizes' must be an array of integers");
            break;
          }
          cfg.task.level_sizes.push_back(v.get<int>());
        }
      }
    }
  }

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

void validate(const SimConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.population_size < 2) problems.push_back("field 'population_size' must be at least 2");
  if (cfg.generations < 0) problems.push_back("field 'generations' must be non-negative");
  if (cfg.n_attempt < 1) problems.push_back("field 'n_attempt' must be at least 1");
  check_probability(problems, "p_sl", cfg.behavior.p_sl);
  check_probability(problems, "p_s", cfg.behavior.p_s);
  check_probability(problems, "p_g", cfg.behavior.p_g);
  if (cfg.behavior.semantic_cost < 1 || cfg.behavior.semantic_cost > 3) problems.push_back("field 'semantic_cost' must be 1, 2 or 3");
  double total = 0;
  for (double f : cfg.strategy_mix) {
    if (!(f >= 0.0)) problems.push_back("field 'strategy_mix' fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) problems.push_back("field 'strategy_mix' fractions must sum to 1, got " + std::to_string(total));
  if (!(cfg.mortality.a >= 0.0)) problems.push_back("field 'mortality.a' must be non-negative");
  if (!std::isfinite(cfg.mortality.b)) problems.push_back("field 'mortality.b' must be finite");
  check_probability(problems, "inheritance.loss_prob", cfg.inheritance.loss_prob);
  if (!(cfg.transmission_noise_sd >= 0.0)) problems.push_back("field 'transmission_noise_sd' must be non-negative");
  if (cfg.embed_dim < 1) problems.push_back("field 'embed_dim' must be at least 1");
  if (cfg.hidden_dim < 1) problems.push_back("field 'hidden_dim' must be at least 1");
  if (!(cfg.learning_rate >= 0.0)) problems.push_back("field 'learning_rate' must be non-negative");
  if (cfg.train_epochs < 0) problems.push_back("field 'train_epochs' must be non-negative");
  if (!(cfg.score_base > 1.0)) problems.push_back("field 'score_base' must exceed 1");
  if (cfg.replicates < 1) problems.push_back("field 'replicates' must be at least 1");
  if (cfg.action_log_generations < 0) problems.push_back("field 'action_log_generations' must be non-negative");
  if (cfg.task.variant != "none" && cfg.task.variant != "shuffle_rules" && cfg.task.variant != "resize") {
    problems.push_back("field 'task.variant' must be \"none\", \"shuffle_rules\" or \"resize\"");
  }
  if (cfg.task.variant == "resize") {
    if (cfg.task.level_sizes.empty() || cfg.task.level_sizes[0] != 6) problems.push_back("field 'task.level_sizes' must start with 6 for resize");
    for (int s : cfg.task.level_sizes) {
      if (s < 1) {
        problems.push_back("field 'task.level_sizes' entries must be at least 1");
        break;
      }
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
}

json config_to_json(const SimConfig& cfg) {
  json j;
  j["population_size"] = cfg.population_size;
  j["generations"] = cfg.generations;
  j["n_attempt"] = cfg.n_attempt;
  j["p_sl"] = cfg.behavior.p_sl;
  j["p_s"] = cfg.behavior.p_s;
  j["p_g"] = cfg.behavior.p_g;
  j["semantic_cost"] = cfg.behavior.semantic_cost;
  json mix = json::object();
  for (int i = 0; i < kStrategyCount; ++i) mix[Strategy::from_index(i).name()] = cfg.strategy_mix[i];
  j["strategy_mix"] = mix;
  j["mortality"] = {{"a", cfg.mortality.a},
                    {"b", cfg.mortality.b},
                    {"sign", cfg.mortality.sign == MortalitySign::Increasing ? "increasing" : "verbatim"}};
  j["inheritance"] = {{"mode", cfg.inheritance.mode == InheritanceMode::KnowledgeOnly ? "knowledge_only" : "knowledge_plus_items"},
                      {"loss_prob", cfg.inheritance.loss_prob}};
  j["transmission_noise_sd"] = cfg.transmission_noise_sd;
  j["train_on_observation"] = cfg.train_on_observation;
  j["pairs_include_product"] = cfg.pairs_include_product;
  j["embed_dim"] = cfg.embed_dim;
  j["hidden_dim"] = cfg.hidden_dim;
  j["learning_rate"] = cfg.learning_rate;
  j["train_epochs"] = cfg.train_epochs;
  j["predict_mode"] = cfg.predict_mode == PredictMode::Sample ? "sample" : "argmax";
  j["score_base"] = cfg.score_base;
  j["task"] = {{"source", cfg.task.source}, {"variant", cfg.task.variant}, {"level_sizes", cfg.task.level_sizes}, {"seed", cfg.task.seed}};
  j["seed"] = cfg.seed;
  j["replicates"] = cfg.replicates;
  j["action_log_generations"] = cfg.action_log_generations;
  j["export_similarity"] = cfg.export_similarity;
  return j;
}

TaskTree build_task_tree(const SimConfig& cfg) {
  TaskTree base = cfg.task.source == "default" ? default_task_tree() : load_task_tree_file(cfg.task.source);
  if (cfg.task.variant == "shuffle_rules") return generate_task_variant(base, VariantMode::ShuffleRules, std::nullopt, cfg.task.seed);
  if (cfg.task.variant == "resize") return generate_task_variant(base, VariantMode::Resize, cfg.task.level_sizes, cfg.task.seed);
  return base;
}

std::array<int, kStrategyCount> strategy_counts(const std::array<double, kStrategyCount>& mix, int n) {
  std::array<int, kStrategyCount> counts{};
  std::array<double, kStrategyCount> rem{};
  int assigned = 0;
  for (int i = 0; i < kStrategyCount; ++i) {
    const double exact = mix[i] * n;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    rem[i] = exact - counts[i];
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < kStrategyCount; ++i) {
      if (rem[i] > rem[best] + 1e-12) best = i;
    }
    ++counts[best];
    rem[best] = -1;
    ++assigned;
  }
  return counts;
}

}  // namespace cce
