#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cce/config.hpp"

namespace cce {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

std::string version_string();
/// FNV-1a 64 of the canonical JSON dump.
std::uint64_t config_hash(const nlohmann::json& config);

/// Accepts either a plain config or a run manifest (uses its recorded config).
SimConfig load_config_file(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

/// manifest.json, summary.csv, replicate_<k>.jsonl and, when requested,
/// similarity_<k>.csv.
int cmd_run(const RunOptions& opt, std::ostream& err);

struct SweepSpec {
  nlohmann::json base = nlohmann::json::object();
  /// Config key (dotted for nested fields) -> values; cells are the cross product.
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
  int replicates = 1;
  std::size_t max_runs = 10000;
};

SweepSpec sweep_from_json(const nlohmann::json& j);
/// One config per cell, in row-major order of the axes.
std::vector<SimConfig> sweep_cells(const SweepSpec& spec);

/// runs.csv (final generation per cell and replicate), cells.csv (per-cell,
/// per-generation median and quartiles), manifest.json.
int cmd_sweep(const RunOptions& opt, std::ostream& err);

struct AnalyzeOptions {
  std::vector<std::filesystem::path> logs;
  /// entropy, unique, features, consecutive, spearman, repertoire
  std::vector<std::string> metrics;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> tree;
  std::optional<std::filesystem::path> semantic;
  std::optional<std::filesystem::path> structural;
  std::optional<std::filesystem::path> color;
  std::vector<std::filesystem::path> matrices;
  std::size_t k = 10;
  std::uint64_t seed = 1;
  double score_base = 2.0;
};

/// Input lines may be AttemptEvents or simulation GenerationRecords (their
/// action slices are used). CSVs go to `out` or, without it, to `stdout`.
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& stdout_, std::ostream& err);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t deployment_seed = 1;
  std::size_t capacity = 1000;
  std::optional<std::filesystem::path> tree;
};

int cmd_serve(const ServeOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace cce
