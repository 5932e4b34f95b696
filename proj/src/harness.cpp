#include "cce/harness.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "cce/evolution.hpp"
#include "cce/http_server.hpp"
#include "cce/metrics.hpp"
#include "cce/session.hpp"
#include "cce/similarity_io.hpp"

namespace cce {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

json parse_json_file(const fs::path& p) {
  const std::string text = read_file(p);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({p.string() + ": " + e.what()});
  }
}

/// Maps exceptions onto the documented exit codes.
template <typename F>
int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << "config error:\n";
    for (const auto& p : e.problems()) err << "  " << p << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const LogParseError& e) {
    err << "log error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

TaskTree tree_for(const SimConfig& cfg) {
  if (cfg.task.source != "default" && !fs::exists(cfg.task.source)) throw IoError("cannot read task tree " + cfg.task.source);
  try {
    return build_task_tree(cfg);
  } catch (const TaskError& e) {
    throw ConfigError({e.what()});
  }
}

/// Runs (tree, config, replicate) tasks on `jobs` threads; results by index.
std::vector<Trajectory> run_tasks(const std::vector<const TaskTree*>& trees, const std::vector<const SimConfig*>& cfgs,
                                  const std::vector<int>& replicates, int jobs) {
  std::vector<Trajectory> out(cfgs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        out[i] = run_replicate(*trees[i], *cfgs[i], replicates[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cfgs.size())));
  std::vector<std::thread> threads;
  for (int k = 1; k < n; ++k) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

json manifest_for(const SimConfig& cfg, const TaskTree& tree) {
  const json c = config_to_json(cfg);
  return {{"config", c},
          {"config_hash", hash_to_hex(config_hash(c))},
          {"version", version_string()},
          {"tree_hash", hash_to_hex(tree.recipe_hash())},
          {"replicates", cfg.replicates}};
}

void set_dotted(json& j, const std::string& key, const json& value) {
  json* node = &j;
  std::size_t start = 0;
  for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
    const std::string part = key.substr(start, dot - start);
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
  }
  (*node)[key.substr(start)] = value;
}

std::string csv_cell(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<AttemptEvent> read_log_file(const fs::path& p) {
  const std::string text = read_file(p);
  std::vector<AttemptEvent> events;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.is_object() && j.contains("generation") && j.contains("actions")) {
        for (const auto& e : j["actions"]) events.push_back(event_from_json(e));
      } else {
        events.push_back(event_from_json(j));
      }
    } catch (const std::exception& e) {
      throw LogParseError(line_no, p.string() + ": " + e.what());
    }
  }
  return events;
}

/// Reorders a labelled matrix into item-id order of `tree`.
Eigen::MatrixXd by_item_id(const LabeledMatrix& m, const TaskTree& tree, const fs::path& source) {
  const auto n = static_cast<Eigen::Index>(tree.size());
  std::vector<Eigen::Index> index(tree.size(), -1);
  for (std::size_t k = 0; k < m.labels.size(); ++k) {
    auto id = tree.find_by_name(m.labels[k]);
    if (!id) throw ConfigError({source.string() + ": label '" + m.labels[k] + "' is not an item of the task tree"});
    index[*id] = static_cast<Eigen::Index>(k);
  }
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (index[static_cast<std::size_t>(i)] < 0) throw ConfigError({source.string() + ": no row for item '" + tree.item(static_cast<ItemId>(i)).name + "'"});
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m.values(index[static_cast<std::size_t>(i)], index[static_cast<std::size_t>(j)]);
  }
  return out;
}

LabeledMatrix read_matrix(const fs::path& p) {
  const std::string text = read_file(p);
  try {
    return parse_similarity_csv(text);
  } catch (const std::exception& e) {
    throw ConfigError({p.string() + ": " + e.what()});
  }
}

}  // namespace

std::string version_string() { return CCE_VERSION; }

std::uint64_t config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SimConfig load_config_file(const fs::path& path) {
  json j = parse_json_file(path);
  if (j.is_object() && j.contains("config") && j.contains("config_hash")) j = j["config"];
  return config_from_json(j);
}

int cmd_run(const RunOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    SimConfig cfg = load_config_file(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    validate(cfg);
    const TaskTree tree = tree_for(cfg);
    ensure_dir(opt.out);

    std::vector<const TaskTree*> trees(static_cast<std::size_t>(cfg.replicates), &tree);
    std::vector<const SimConfig*> cfgs(trees.size(), &cfg);
    std::vector<int> reps(trees.size());
    std::iota(reps.begin(), reps.end(), 0);
    const auto trajectories = run_tasks(trees, cfgs, reps, opt.jobs);

    std::string summary = summary_csv_header();
    json files = json::array({"summary.csv"});
    for (const auto& t : trajectories) {
      summary += summary_csv_rows(t);
      const std::string name = "replicate_" + std::to_string(t.replicate) + ".jsonl";
      write_file(opt.out / name, trajectory_jsonl(t));
      files.push_back(name);
      if (t.final_similarity) {
        const std::string sim = "similarity_" + std::to_string(t.replicate) + ".csv";
        write_file(opt.out / sim, format_similarity_csv(*t.final_similarity));
        files.push_back(sim);
      }
    }
    write_file(opt.out / "summary.csv", summary);
    json manifest = manifest_for(cfg, tree);
    manifest["files"] = files;
    write_file(opt.out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
  });
}

SweepSpec sweep_from_json(const json& j) {
  std::vector<std::string> problems;
  SweepSpec s;
  if (!j.is_object()) throw ConfigError({"sweep spec must be a JSON object"});
  for (const auto& [key, _] : j.items()) {
    if (key != "base" && key != "axes" && key != "replicates" && key != "max_runs") problems.push_back("unknown key '" + key + "'");
  }
  if (j.contains("base")) {
    if (!j["base"].is_object()) problems.push_back("field 'base' must be an object");
    else s.base = j["base"];
  }
  if (j.contains("axes")) {
    if (!j["axes"].is_object()) {
      problems.push_back("field 'axes' must be an object of value lists");
    } else {
      for (const auto& [key, values] : j["axes"].items()) {
        if (!values.is_array() || values.empty()) {
          problems.push_back("axis '" + key + "' must be a non-empty list");
          continue;
        }
        s.axes.emplace_back(key, std::vector<json>(values.begin(), values.end()));
      }
    }
  }
  if (j.contains("replicates")) {
    if (!j["replicates"].is_number_integer() || j["replicates"].get<int>() < 1) problems.push_back("field 'replicates' must be a positive integer");
    else s.replicates = j["replicates"].get<int>();
  }
  if (j.contains("max_runs")) {
    if (!j["max_runs"].is_number_integer() || j["max_runs"].get<long long>() < 1) problems.push_back("field 'max_runs' must be a positive integer");
    else s.max_runs = j["max_runs"].get<std::size_t>();
  }
  if (!problems.empty()) throw ConfigError(problems);
  return s;
}

std::vector<SimConfig> sweep_cells(const SweepSpec& spec) {
  std::size_t cells = 1;
  for (const auto& [key, values] : spec.axes) cells *= values.size();
  if (cells * static_cast<std::size_t>(spec.replicates) > spec.max_runs) {
    throw ConfigError({"sweep needs " + std::to_string(cells * spec.replicates) + " runs, above the cap of " + std::to_string(spec.max_runs)});
  }
  std::vector<SimConfig> out;
  std::vector<std::string> problems;
  for (std::size_t c = 0; c < cells; ++c) {
    json cfg = spec.base;
    std::size_t rest = c;
    for (auto it = spec.axes.rbegin(); it != spec.axes.rend(); ++it) {
      set_dotted(cfg, it->first, it->second[rest % it->second.size()]);
      rest /= it->second.size();
    }
    cfg["replicates"] = spec.replicates;
    try {
      out.push_back(config_from_json(cfg));
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems()) problems.push_back("cell " + std::to_string(c) + ": " + p);
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return out;
}

int cmd_sweep(const RunOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    SweepSpec spec = sweep_from_json(parse_json_file(opt.config));
    if (opt.seed) spec.base["seed"] = *opt.seed;
    auto cells = sweep_cells(spec);
    std::vector<TaskTree> trees;
    trees.reserve(cells.size());
    for (const auto& c : cells) trees.push_back(tree_for(c));
    ensure_dir(opt.out);

    std::vector<const TaskTree*> tp;
    std::vector<const SimConfig*> cp;
    std::vector<int> reps;
    std::vector<std::size_t> cell_of;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (int r = 0; r < spec.replicates; ++r) {
        tp.push_back(&trees[c]);
        cp.push_back(&cells[c]);
        reps.push_back(r);
        cell_of.push_back(c);
      }
    }
    const auto results = run_tasks(tp, cp, reps, opt.jobs);

    std::string axis_header;
    for (const auto& [key, _] : spec.axes) axis_header += "," + key;
    auto axis_values = [&](std::size_t c) {
      std::string s;
      std::size_t rest = c;
      std::vector<std::string> parts(spec.axes.size());
      for (std::size_t a = spec.axes.size(); a-- > 0;) {
        parts[a] = csv_cell(spec.axes[a].second[rest % spec.axes[a].second.size()]);
        rest /= spec.axes[a].second.size();
      }
      for (const auto& p : parts) s += "," + p;
      return s;
    };

    std::string runs = "cell" + axis_header + ",replicate,generations,repertoire_instant,repertoire_cumulative,mean_score";
    for (int i = 0; i < kStrategyCount; ++i) runs += "," + Strategy::from_index(i).name();
    runs += "\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i].records.back();
      runs += std::to_string(cell_of[i]) + axis_values(cell_of[i]) + "," + std::to_string(reps[i]) + "," +
              std::to_string(r.generation) + "," + std::to_string(r.repertoire_instant) + "," +
              std::to_string(r.repertoire_cumulative) + "," + fmt(r.mean_score);
      for (int c : r.strategy_counts) runs += "," + std::to_string(c);
      runs += "\n";
    }
    write_file(opt.out / "runs.csv", runs);

    std::string bands = "cell" + axis_header +
                        ",generation,n,instant_median,instant_q1,instant_q3,cumulative_median,cumulative_q1,cumulative_q3,"
                        "mean_score_median,mean_score_q1,mean_score_q3\n";
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::vector<const Trajectory*> members;
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (cell_of[i] == c) members.push_back(&results[i]);
      }
      const std::size_t gens = members.front()->records.size();
      for (std::size_t g = 0; g < gens; ++g) {
        std::vector<double> inst, cum, score;
        for (const auto* t : members) {
          inst.push_back(t->records[g].repertoire_instant);
          cum.push_back(t->records[g].repertoire_cumulative);
          score.push_back(t->records[g].mean_score);
        }
        bands += std::to_string(c) + axis_values(c) + "," + std::to_string(g) + "," + std::to_string(members.size());
        for (auto* v : {&inst, &cum, &score}) {
          bands += "," + fmt(quantile(*v, 0.5)) + "," + fmt(quantile(*v, 0.25)) + "," + fmt(quantile(*v, 0.75));
        }
        bands += "\n";
      }
    }
    write_file(opt.out / "cells.csv", bands);

    json manifest{{"sweep", {{"base", spec.base}, {"replicates", spec.replicates}, {"max_runs", spec.max_runs}}},
                  {"version", version_string()},
                  {"cells", json::array()}};
    json axes = json::object();
    for (const auto& [key, values] : spec.axes) axes[key] = values;
    manifest["sweep"]["axes"] = axes;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const json cj = config_to_json(cells[c]);
      manifest["cells"].push_back({{"cell", c}, {"config", cj}, {"config_hash", hash_to_hex(config_hash(cj))},
                                   {"tree_hash", hash_to_hex(trees[c].recipe_hash())}});
    }
    write_file(opt.out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
  });
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& stdout_, std::ostream& err) {
  return guarded(err, [&] {
    static const std::vector<std::string> known{"entropy", "unique", "features", "consecutive", "spearman", "repertoire"};
    if (opt.metrics.empty()) throw ConfigError({"no metric requested"});
    for (const auto& m : opt.metrics) {
      if (std::find(known.begin(), known.end(), m) == known.end()) throw ConfigError({"unknown metric '" + m + "'"});
    }
    std::optional<TaskTree> custom;
    if (opt.tree) {
      try {
        custom = load_task_tree(read_file(*opt.tree));
      } catch (const TaskError& e) {
        throw ConfigError({e.what()});
      }
    }
    const TaskTree& tree = custom ? *custom : default_task_tree();

    auto needs_log = [&](const std::string& m) { return m != "spearman"; };
    std::vector<AttemptEvent> log;
    if (std::any_of(opt.metrics.begin(), opt.metrics.end(), needs_log)) {
      if (opt.logs.empty()) throw ConfigError({"no event log given"});
      for (const auto& p : opt.logs) {
        auto part = read_log_file(p);
        log.insert(log.end(), part.begin(), part.end());
      }
    }
    if (opt.out) ensure_dir(*opt.out);
    auto emit = [&](const std::string& name, const std::string& text) {
      if (opt.out) write_file(*opt.out / (name + ".csv"), text);
      else stdout_ << text;
    };

    for (const auto& m : opt.metrics) {
      if (m == "entropy") {
        emit(m, entropy_csv(entropy_by_state(log, tree)));
      } else if (m == "unique") {
        emit(m, unique_actions_csv(unique_actions_by_state(log, tree)));
      } else if (m == "repertoire") {
        std::string csv = "step,repertoire\n";
        for (const auto& p : repertoire_series(log, tree)) csv += std::to_string(p.step) + "," + std::to_string(p.cumulative) + "\n";
        emit(m, csv);
      } else if (m == "consecutive") {
        if (!opt.semantic) throw ConfigError({"consecutive needs --semantic <matrix.csv>"});
        const auto sim = by_item_id(read_matrix(*opt.semantic), tree, *opt.semantic);
        emit(m, consecutive_csv(consecutive_similarity(log, sim)));
      } else if (m == "features") {
        std::optional<Eigen::MatrixXd> sem, str, col;
        if (opt.semantic) sem = by_item_id(read_matrix(*opt.semantic), tree, *opt.semantic);
        if (opt.structural) str = by_item_id(read_matrix(*opt.structural), tree, *opt.structural);
        if (opt.color) col = by_item_id(read_matrix(*opt.color), tree, *opt.color);
        FeatureSources src{sem ? &*sem : nullptr, str ? &*str : nullptr, col ? &*col : nullptr, opt.score_base};
        Rng rng = make_stream(opt.seed, 0);
        emit(m, feature_table_csv(behavioral_feature_table(log, tree, src, opt.k, rng)));
      } else if (m == "spearman") {
        if (opt.matrices.size() != 2) throw ConfigError({"spearman needs exactly two --matrix files"});
        const auto a = read_matrix(opt.matrices[0]);
        const auto b = read_matrix(opt.matrices[1]);
        if (a.labels.size() != b.labels.size()) throw ConfigError({"matrices have different sizes"});
        std::vector<Eigen::Index> perm(a.labels.size());
        for (std::size_t i = 0; i < a.labels.size(); ++i) {
          auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[i]);
          if (it == b.labels.end()) throw ConfigError({"label '" + a.labels[i] + "' missing from " + opt.matrices[1].string()});
          perm[i] = it - b.labels.begin();
        }
        Eigen::MatrixXd bb(b.values.rows(), b.values.cols());
        for (std::size_t i = 0; i < perm.size(); ++i) {
          for (std::size_t j = 0; j < perm.size(); ++j) bb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b.values(perm[i], perm[j]);
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g\n", spearman_rho(a.values, bb));
        stdout_ << buf;
      }
    }
    return kExitOk;
  });
}

int cmd_serve(const ServeOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::optional<TaskTree> custom;
    if (opt.tree) {
      try {
        custom = load_task_tree(read_file(*opt.tree));
      } catch (const TaskError& e) {
        throw ConfigError({e.what()});
      }
    }
    SessionManager sessions(custom ? *custom : default_task_tree(), opt.deployment_seed, opt.capacity, nullptr);
    HttpServer server(sessions);
    const int port = server.bind(opt.host, opt.port);
    if (port < 0) throw IoError("cannot bind " + opt.host + ":" + std::to_string(opt.port));
    out << "listening on http://" << opt.host << ":" << port << std::endl;
    server.serve();
    return kExitOk;
  });
}

}  // namespace cce
