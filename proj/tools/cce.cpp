#include <iostream>

#include <CLI11.hpp>

#include "cce/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cumulative cultural evolution simulator, analysis toolkit and play server"};
  app.set_version_flag("--version", cce::version_string());
  app.require_subcommand(1);

  cce::RunOptions run;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run every replicate of one configuration");
  run_cmd->add_option("--config", run.config, "Config JSON (or a run manifest)")->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Override the master seed");

  cce::RunOptions sweep;
  std::uint64_t sweep_seed = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  sweep_cmd->add_option("--config", sweep.config, "Sweep spec JSON: base, axes, replicates, max_runs")->required();
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "Override the base master seed");

  cce::AnalyzeOptions an;
  std::string out_dir;
  std::string tree, semantic, structural, color;
  auto* an_cmd = app.add_subcommand("analyze", "Compute metrics from event logs or trajectories");
  an_cmd->add_option("logs", an.logs, "Event JSONL or trajectory JSONL files");
  an_cmd->add_option("--metric", an.metrics, "entropy, unique, features, consecutive, spearman, repertoire")->required();
  an_cmd->add_option("--out", out_dir, "Directory for <metric>.csv (default: stdout)");
  an_cmd->add_option("--tree", tree, "Task tree JSON (default: bundled tree)");
  an_cmd->add_option("--semantic", semantic, "Semantic similarity CSV");
  an_cmd->add_option("--structural", structural, "Structural similarity CSV");
  an_cmd->add_option("--color", color, "Color similarity CSV");
  an_cmd->add_option("--matrix", an.matrices, "Similarity CSV (give two for spearman)");
  an_cmd->add_option("--k", an.k, "Alternatives per attempt for features");
  an_cmd->add_option("--seed", an.seed, "Seed for alternative sampling");

  cce::ServeOptions serve;
  std::string serve_tree;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live play sessions over HTTP");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--seed", serve.deployment_seed, "Deployment seed for non-semantic labels");
  serve_cmd->add_option("--capacity", serve.capacity, "Maximum number of sessions");
  serve_cmd->add_option("--tree", serve_tree, "Task tree JSON (default: bundled tree)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cce::kExitConfig;
  }

  if (*run_cmd) {
    if (*run_seed_opt) run.seed = run_seed;
    return cce::cmd_run(run, std::cerr);
  }
  if (*sweep_cmd) {
    if (*sweep_seed_opt) sweep.seed = sweep_seed;
    return cce::cmd_sweep(sweep, std::cerr);
  }
  if (*an_cmd) {
    if (!out_dir.empty()) an.out = out_dir;
    if (!tree.empty()) an.tree = tree;
    if (!semantic.empty()) an.semantic = semantic;
    if (!structural.empty()) an.structural = structural;
    if (!color.empty()) an.color = color;
    return cce::cmd_analyze(an, std::cout, std::cerr);
  }
  if (!serve_tree.empty()) serve.tree = serve_tree;
  return cce::cmd_serve(serve, std::cout, std::cerr);
}
