#pragma once

#include <cstdint>
#include <string>

#include "dice/bandit.hpp"
#include "dice/errors.hpp"
#include "dice/traces.hpp"

namespace dice {

enum class Estimator { drtrace, vtrace_retrace };

inline const char* to_string(Estimator e) { return e == Estimator::drtrace ? "drtrace" : "vtrace+retrace"; }

struct AblationFlags {
  bool no_stop_pi = false;      ///< gradient flows through pi in the advantage baseline
  bool no_stop_v = false;       ///< the Q loss also trains V
  bool no_drtrace = false;      ///< V-Trace for V and ReTrace for Q
  bool random_scaling = false;  ///< alpha, beta ~ U[0, 20] per sample
  bool no_bva = false;          ///< temperatures from a fixed, never-updated ensemble
};

/// How actors pick each episode's temperature.
enum class TemperatureMode { bandit, fixed_distribution, unit };

struct RunConfig {
  double gamma = 0.997;
  double xi = 1.0;
  double alpha = 10.0;
  double beta = 10.0;
  double c_bar = 1.05;
  double rho_bar = 1.05;
  int d_push = 25;
  int d_pull = 64;
  int num_actors = 4;
  int batch_size = 8;
  double learning_rate = 0.05;
  long total_steps = 2000;  ///< learner steps
  std::uint64_t seed = 1;
  AblationFlags flags;
  bool baseline = false;  ///< tau = 1 for every episode, no bandit
  Estimator estimator = Estimator::drtrace;
  int sample_reuse = 2;
  int queue_capacity = 256;
  long eval_interval = 100;
  int eval_episodes = 10;
  int max_episode_steps = 200;
  bool sync = true;
  EnsembleConfig bandit;

  Estimator effective_estimator() const { return flags.no_drtrace ? Estimator::vtrace_retrace : estimator; }

  TemperatureMode temperature_mode() const {
    if (baseline) return TemperatureMode::unit;
    if (flags.no_bva) return TemperatureMode::fixed_distribution;
    return TemperatureMode::bandit;
  }

  TraceConfig trace_config() const {
    TraceConfig t;
    t.c_bar = c_bar;
    t.rho_bar = rho_bar;
    t.gamma = gamma;
    return t;
  }

  void validate() const {
    if (baseline && flags.no_bva) throw InvalidConfig("baseline and no_bva both replace the bandit; pick one");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidConfig("gamma must lie in (0, 1)");
    if (!(c_bar >= 1.0) || !(rho_bar >= c_bar)) throw InvalidConfig("need 1 <= c_bar <= rho_bar");
    if (xi < 0.0 || alpha < 0.0 || beta < 0.0) throw InvalidConfig("loss scales must be non-negative");
    if (!(learning_rate >= 0.0)) throw InvalidConfig("learning_rate must be non-negative");
    if (d_push < 1 || d_pull < 1) throw InvalidConfig("d_push and d_pull must be >= 1");
    if (num_actors < 1) throw InvalidConfig("num_actors must be >= 1");
    if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
    if (total_steps < 0) throw InvalidConfig("total_steps must be non-negative");
    if (sample_reuse < 1) throw InvalidConfig("sample_reuse must be >= 1");
    if (queue_capacity < batch_size) throw InvalidConfig("queue_capacity must be >= batch_size");
    if (eval_interval < 1) throw InvalidConfig("eval_interval must be >= 1");
    if (eval_episodes < 1) throw InvalidConfig("eval_episodes must be >= 1");
    if (max_episode_steps < 1) throw InvalidConfig("max_episode_steps must be >= 1");
  }
};

}  // namespace dice
