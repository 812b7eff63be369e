#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "dice/bandit.hpp"
#include "dice/mdp.hpp"
#include "dice/policy.hpp"
#include "dice/runtime/config.hpp"
#include "dice/runtime/data_collector.hpp"
#include "dice/runtime/parameter_server.hpp"
#include "dice/trajectory.hpp"

namespace dice {

/// Bandit ensemble behind a mutex; proposals and updates never interleave.
class SharedEnsemble {
 public:
  explicit SharedEnsemble(BanditEnsemble e) : ensemble_(std::move(e)) {}

  template <class Generator>
  double propose(Generator& rng) const {
    std::lock_guard lock(mu_);
    return ensemble_propose(ensemble_, rng);
  }

  void update(double tau, double g) {
    std::lock_guard lock(mu_);
    ensemble_update(ensemble_, tau, g);
  }

  double best_tau() const {
    std::lock_guard lock(mu_);
    return ensemble_best_tau(ensemble_);
  }

  BanditEnsemble snapshot() const {
    std::lock_guard lock(mu_);
    return ensemble_;
  }

 private:
  mutable std::mutex mu_;
  BanditEnsemble ensemble_;
};

/// Per-episode record of what the actors did, gathered between evaluations.
class EpisodeLog {
 public:
  struct Window {
    std::vector<double> temperatures;
    std::vector<double> entropies;
  };

  void record(const Trajectory& traj) {
    std::lock_guard lock(mu_);
    window_.temperatures.push_back(traj.temperature.value_or(1.0));
    window_.entropies.push_back(traj.mean_entropy);
    env_steps_ += traj.steps.size();
    ++episodes_;
  }

  Window take() {
    std::lock_guard lock(mu_);
    Window out = std::move(window_);
    window_ = {};
    return out;
  }

  std::uint64_t env_steps() const {
    std::lock_guard lock(mu_);
    return env_steps_;
  }

  std::uint64_t episodes() const {
    std::lock_guard lock(mu_);
    return episodes_;
  }

 private:
  mutable std::mutex mu_;
  Window window_;
  std::uint64_t env_steps_ = 0;
  std::uint64_t episodes_ = 0;
};

/// Where an actor's episode temperatures come from.
struct TemperatureSource {
  TemperatureMode mode = TemperatureMode::unit;
  SharedEnsemble* ensemble = nullptr;  ///< required unless mode is unit

  template <class Generator>
  double sample(Generator& rng) const {
    if (mode == TemperatureMode::unit) return 1.0;
    return ensemble->propose(rng);
  }

  void feedback(double tau, double g) const {
    if (mode == TemperatureMode::bandit) ensemble->update(tau, g);
  }
};

class Actor {
 public:
  Actor(int id, Rng rng) : id_(id), rng_(std::move(rng)) {}

  /// Plays one episode with pi_tau = softmax(A(s,.)/tau), pulling fresh parameters
  /// every d_pull environment steps, then reports the shaped return to the source.
  Trajectory run_episode(const TabularMdp& env, const ParameterServer& server, const TemperatureSource& source,
                         const RunConfig& cfg) {
    if (!params_) params_ = server.snapshot();
    const double tau = source.sample(rng_);
    std::uint64_t newest = params_->version;
    auto behavior = [&](int s) {
      if (since_pull_ >= cfg.d_pull) {
        params_ = server.snapshot();
        since_pull_ = 0;
      }
      ++since_pull_;
      newest = std::max(newest, params_->version);
      return boltzmann_policy(row_span(params_->advantages, s), tau);
    };
    Trajectory traj = sample_episode(env, behavior, tau, rng_, cfg.max_episode_steps);
    traj.params_version = newest;
    traj.actor = id_;
    source.feedback(tau, traj.episode_return);
    return traj;
  }

  int id() const { return id_; }
  Rng& rng() { return rng_; }
  std::uint64_t params_version() const { return params_ ? params_->version : 0; }

 private:
  int id_;
  Rng rng_;
  std::shared_ptr<const AgentParams> params_;
  int since_pull_ = 0;
};

/// Runs episodes into the collector until `stop` is set or the collector closes.
inline void actor_loop(Actor& actor, const TabularMdp& env, const ParameterServer& server,
                       const TemperatureSource& source, DataCollector& collector, EpisodeLog& log,
                       const RunConfig& cfg, const std::atomic<bool>& stop) {
  while (!stop.load()) {
    Trajectory traj = actor.run_episode(env, server, source, cfg);
    log.record(traj);
    if (!collector.submit(std::move(traj))) return;
  }
}

}  // namespace dice
