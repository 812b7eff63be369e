#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dice/cli/experiment.hpp"
#include "dice/cli/plot.hpp"
#include "dice/cli/summary.hpp"
#include "dice/environments.hpp"
#include "dice/runtime/checkpoint.hpp"
#include "dice/runtime/training.hpp"

namespace dice::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string usage_text() {
  return "usage: dice_rl run <config-file> [--env NAME|FILE] [--seeds 1,2,3] [--steps N]\n"
         "                  [--ablation no_bva|baseline|no_drtrace|no_stop_pi|no_stop_v|random_scaling]...\n"
         "                  [--sync] [--out DIR] [--plot]\n";
}

/// Parses arguments (without the program name). Config-file values are applied
/// first, then command-line flags override them.
inline ExperimentSpec parse_args(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError(usage_text());
  CLI::App app{"dice_rl"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "train on a tabular environment");
  std::string config_path, env, out_dir, seeds;
  long steps = -1;
  std::vector<std::string> ablations;
  bool sync = false, plot = false;
  run->add_option("config", config_path, "key=value config file")->required();
  run->add_option("--env", env, "built-in environment name or MDP file");
  run->add_option("--seeds", seeds, "comma-separated seeds");
  run->add_option("--steps", steps, "learner steps")->check(CLI::NonNegativeNumber);
  run->add_option("--ablation", ablations, "ablation switch (repeatable)")
      ->check(CLI::IsMember(ablation_names()))
      ->delimiter(',');
  run->add_flag("--sync", sync, "deterministic single-thread schedule");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--plot", plot, "also write an SVG plot");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + usage_text());
  }

  ExperimentSpec spec;
  spec.config_path = config_path;
  try {
    load_config_file(config_path, spec);
  } catch (const std::exception& e) {
    throw UsageError(std::string(e.what()) + "\n" + usage_text());
  }
  if (!env.empty()) spec.environment = env;
  if (!out_dir.empty()) spec.out_dir = out_dir;
  if (!seeds.empty()) {
    try {
      spec.seeds = detail::parse_seeds(seeds);
    } catch (const std::exception& e) {
      throw UsageError(std::string(e.what()) + "\n" + usage_text());
    }
  }
  if (steps >= 0) spec.config.total_steps = steps;
  if (sync) spec.config.sync = true;
  if (plot) spec.plot = true;
  spec.ablations.insert(spec.ablations.end(), ablations.begin(), ablations.end());
  try {
    for (const auto& name : spec.ablations) apply_ablation(spec.config, name);
    spec.validate();
  } catch (const std::exception& e) {
    throw UsageError(std::string(e.what()) + "\n" + usage_text());
  }
  return spec;
}

/// Mean raw returns of the uniform-random policy and of the optimal policy,
/// used as the two anchors of the normalized score.
inline std::pair<double, double> reference_returns(const TabularMdp& env, const RunConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 7);
  const int episodes = 20 * cfg.eval_episodes;
  auto uniform = [&](int) { return PolicyDistribution(static_cast<std::size_t>(env.num_actions), 1.0 / env.num_actions); };
  const double g_random = mean_of(rollout_returns(env, uniform, episodes, cfg.max_episode_steps, rng).raw);
  const auto best = optimal_values(env);
  const double g_ref = mean_of(evaluate_greedy(env, best.q, episodes, cfg.max_episode_steps, rng).raw);
  return {g_random, g_ref};
}

/// Runs every seed and writes metrics_seed<k>.csv, checkpoint_seed<k>.txt,
/// summary.csv and (with --plot) summary.svg under spec.out_dir.
inline std::vector<TrainingReport> run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  const TabularMdp env = make_environment(spec.environment);
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  std::vector<TrainingReport> reports;
  for (std::uint64_t seed : spec.seeds) {
    RunConfig cfg = spec.config;
    cfg.seed = seed;
    TrainingReport report = run_training(env, cfg);
    {
      std::ofstream csv(fs::path(spec.out_dir) / ("metrics_seed" + std::to_string(seed) + ".csv"));
      write_metrics_csv(csv, report);
    }
    {
      std::ofstream cp(fs::path(spec.out_dir) / ("checkpoint_seed" + std::to_string(seed) + ".txt"));
      write_checkpoint(cp, report.final_state);
    }
    log << "seed " << seed << ": " << report.learner_steps << " learner steps, " << report.episodes
        << " episodes, final greedy return " << format_number(report.points.back().mean_return) << "\n";
    reports.push_back(std::move(report));
  }
  const auto rows = summarize(reports);
  const auto [g_random, g_ref] = reference_returns(env, spec.config);
  {
    std::ofstream csv(fs::path(spec.out_dir) / "summary.csv");
    write_summary_csv(csv, rows, g_random, g_ref);
  }
  if (spec.plot) {
    std::ofstream svg(fs::path(spec.out_dir) / "summary.svg");
    write_summary_plot(svg, env.name, rows);
  }
  return reports;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec;
  try {
    spec = parse_args(args);
  } catch (const UsageError& e) {
    err << e.what();
    return kExitUsage;
  }
  try {
    run_experiment(spec, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dice::cli
