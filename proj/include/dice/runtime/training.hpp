#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dice/bandit.hpp"
#include "dice/mdp.hpp"
#include "dice/runtime/actor.hpp"
#include "dice/runtime/checkpoint.hpp"
#include "dice/runtime/config.hpp"
#include "dice/runtime/data_collector.hpp"
#include "dice/runtime/learner.hpp"
#include "dice/runtime/parameter_server.hpp"

namespace dice {

struct EvalPoint {
  long step = 0;
  double mean_return = 0.0;  ///< raw return of the greedy policy
  double median_return = 0.0;
  double mean_shaped_return = 0.0;
  double median_shaped_return = 0.0;
  double entropy = std::numeric_limits<double>::quiet_NaN();  ///< mean behavior entropy since last point
  double tau_p10 = std::numeric_limits<double>::quiet_NaN();
  double tau_p50 = std::numeric_limits<double>::quiet_NaN();
  double tau_p90 = std::numeric_limits<double>::quiet_NaN();
  double bva_return = std::numeric_limits<double>::quiet_NaN();  ///< raw return at the ensemble's best tau
};

struct TrainingReport {
  std::string environment;
  std::uint64_t seed = 0;
  std::vector<EvalPoint> points;
  long learner_steps = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t trajectory_uses = 0;
  double wall_seconds = 0.0;
  Checkpoint final_state;
};

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

/// Linear-interpolated quantile, q in [0, 1].
inline double quantile_of(std::vector<double> xs, double q) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

inline double median_of(const std::vector<double>& xs) { return quantile_of(xs, 0.5); }

struct RolloutSummary {
  std::vector<double> raw;
  std::vector<double> shaped;
};

template <class Behavior, class Generator>
RolloutSummary rollout_returns(const TabularMdp& env, Behavior&& behavior, int episodes, int max_steps,
                               Generator& rng) {
  RolloutSummary out;
  for (int i = 0; i < episodes; ++i) {
    const Trajectory traj = sample_episode(env, behavior, 1.0, rng, max_steps);
    out.raw.push_back(traj.raw_return);
    out.shaped.push_back(traj.episode_return);
  }
  return out;
}

/// Greedy argmax_a A(s,a) evaluation.
template <class Generator>
RolloutSummary evaluate_greedy(const TabularMdp& env, const StateActionTable& advantages, int episodes,
                               int max_steps, Generator& rng) {
  const PolicyTable greedy = greedy_policy(advantages);
  auto behavior = [&](int s) {
    const auto row = row_span(greedy, s);
    return PolicyDistribution(row.begin(), row.end());
  };
  return rollout_returns(env, behavior, episodes, max_steps, rng);
}

inline std::seed_seq::result_type seed_word(std::uint64_t x, int shift) {
  return static_cast<std::seed_seq::result_type>(x >> shift);
}

/// Independent engine for a named stream of a run.
inline Rng stream_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{seed_word(seed, 0), seed_word(seed, 32), static_cast<std::seed_seq::result_type>(stream)};
  return Rng(seq);
}

inline constexpr std::uint32_t kLearnerStream = 1;
inline constexpr std::uint32_t kBanditStream = 2;
inline constexpr std::uint32_t kEvalStream = 3;
inline constexpr std::uint32_t kActorStreamBase = 100;

/// Number of actor threads: num_actors, capped by DICE_RL_THREADS when set.
inline int actor_thread_count(const RunConfig& cfg) {
  int n = cfg.num_actors;
  if (const char* env = std::getenv("DICE_RL_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

namespace detail {

inline const RunConfig& validated(const RunConfig& cfg) {
  cfg.validate();
  return cfg;
}

inline const TabularMdp& validated(const TabularMdp& env) {
  env.validate();
  return env;
}

class Trainer {
 public:
  Trainer(const TabularMdp& env, const RunConfig& cfg)
      : env_(validated(env)),
        cfg_(validated(cfg)),
        params_(AgentParams::zeros(env.num_states, env.num_actions)),
        server_(params_),
        collector_(static_cast<std::size_t>(cfg.queue_capacity), cfg.sample_reuse),
        learner_rng_(stream_rng(cfg.seed, kLearnerStream)),
        eval_rng_(stream_rng(cfg.seed, kEvalStream)) {
    source_.mode = cfg.temperature_mode();
    if (source_.mode != TemperatureMode::unit) {
      Rng bandit_rng = stream_rng(cfg.seed, kBanditStream);
      ensemble_ = std::make_unique<SharedEnsemble>(ensemble_init(cfg.bandit, bandit_rng));
      source_.ensemble = ensemble_.get();
    }
    const int actors = cfg.sync ? cfg.num_actors : actor_thread_count(cfg);
    for (int i = 0; i < actors; ++i) {
      actors_.emplace_back(i, stream_rng(cfg.seed, kActorStreamBase + static_cast<std::uint32_t>(i)));
    }
  }

  TrainingReport run() {
    const auto start = std::chrono::steady_clock::now();
    report_.environment = env_.name;
    report_.seed = cfg_.seed;
    evaluate(0);
    if (cfg_.sync) {
      run_sync();
    } else {
      run_async();
    }
    if (report_.points.back().step != report_.learner_steps) evaluate(report_.learner_steps);
    report_.env_steps = log_.env_steps();
    report_.episodes = log_.episodes();
    report_.trajectory_uses = collector_.handed_out();
    report_.final_state.params = params_;
    report_.final_state.rng_states.emplace_back("learner", rng_state(learner_rng_));
    report_.final_state.rng_states.emplace_back("eval", rng_state(eval_rng_));
    for (auto& a : actors_) report_.final_state.rng_states.emplace_back("actor" + std::to_string(a.id()), rng_state(a.rng()));
    if (ensemble_) report_.final_state.ensemble = ensemble_->snapshot();
    report_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report_;
  }

 private:
  void learn(const std::vector<DataCollector::Item>& batch) {
    params_ = learner_step(params_, batch, cfg_, learner_rng_);
    ++report_.learner_steps;
    if (report_.learner_steps % cfg_.d_push == 0) server_.publish(params_);
    if (report_.learner_steps % cfg_.eval_interval == 0) evaluate(report_.learner_steps);
  }

  void run_sync() {
    std::size_t next_actor = 0;
    const auto batch_size = static_cast<std::size_t>(cfg_.batch_size);
    while (report_.learner_steps < cfg_.total_steps) {
      while (collector_.size() < batch_size) {
        Actor& actor = actors_[next_actor];
        next_actor = (next_actor + 1) % actors_.size();
        Trajectory traj = actor.run_episode(env_, server_, source_, cfg_);
        log_.record(traj);
        collector_.try_submit(std::move(traj));
      }
      learn(*collector_.next_batch(batch_size));
    }
  }

  void run_async() {
    if (cfg_.total_steps == 0) return;
    std::atomic<bool> stop{false};
    std::vector<std::thread> threads;
    for (auto& actor : actors_) {
      threads.emplace_back([&, ptr = &actor] { actor_loop(*ptr, env_, server_, source_, collector_, log_, cfg_, stop); });
    }
    try {
      while (report_.learner_steps < cfg_.total_steps) {
        auto batch = collector_.next_batch(static_cast<std::size_t>(cfg_.batch_size));
        if (!batch) break;
        learn(*batch);
      }
    } catch (...) {
      stop = true;
      collector_.shutdown();
      for (auto& t : threads) t.join();
      throw;
    }
    stop = true;
    collector_.shutdown();
    for (auto& t : threads) t.join();
  }

  void evaluate(long step) {
    EvalPoint point;
    point.step = step;
    const auto greedy = evaluate_greedy(env_, params_.advantages, cfg_.eval_episodes, cfg_.max_episode_steps, eval_rng_);
    point.mean_return = mean_of(greedy.raw);
    point.median_return = median_of(greedy.raw);
    point.mean_shaped_return = mean_of(greedy.shaped);
    point.median_shaped_return = median_of(greedy.shaped);
    const auto window = log_.take();
    point.entropy = mean_of(window.entropies);
    point.tau_p10 = quantile_of(window.temperatures, 0.1);
    point.tau_p50 = quantile_of(window.temperatures, 0.5);
    point.tau_p90 = quantile_of(window.temperatures, 0.9);
    if (source_.mode == TemperatureMode::bandit) {
      const double tau = ensemble_->best_tau();
      auto behavior = [&](int s) { return boltzmann_policy(row_span(params_.advantages, s), tau); };
      point.bva_return = mean_of(rollout_returns(env_, behavior, cfg_.eval_episodes, cfg_.max_episode_steps, eval_rng_).raw);
    }
    report_.points.push_back(point);
  }

  const TabularMdp& env_;
  RunConfig cfg_;
  AgentParams params_;
  ParameterServer server_;
  DataCollector collector_;
  EpisodeLog log_;
  Rng learner_rng_;
  Rng eval_rng_;
  std::unique_ptr<SharedEnsemble> ensemble_;
  TemperatureSource source_;
  std::vector<Actor> actors_;
  TrainingReport report_;
};

}  // namespace detail

/// Trains on `env`. Evaluation points are taken at learner step 0, every
/// eval_interval steps, and after the last step. In sync mode actors and the
/// learner share one thread and one schedule, so a seed fixes the whole report.
inline TrainingReport run_training(const TabularMdp& env, const RunConfig& cfg) {
  detail::Trainer trainer(env, cfg);
  return trainer.run();
}

/// Metrics CSV. Non-finite values print as "nan".
inline void write_metrics_csv(std::ostream& out, const TrainingReport& report) {
  out << "step,mean_return,median_return,entropy,tau_p10,tau_p50,tau_p90,"
         "mean_shaped_return,median_shaped_return,bva_return\n";
  char buf[64];
  auto num = [&](double x) -> const char* {
    if (!std::isfinite(x)) return "nan";
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
  };
  for (const auto& p : report.points) {
    out << p.step;
    for (double x : {p.mean_return, p.median_return, p.entropy, p.tau_p10, p.tau_p50, p.tau_p90,
                     p.mean_shaped_return, p.median_shaped_return, p.bva_return}) {
      out << ',' << num(x);
    }
    out << '\n';
  }
}

}  // namespace dice
