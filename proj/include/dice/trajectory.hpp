#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dice/errors.hpp"

namespace dice {

struct StepRecord {
  int state = 0;
  int action = 0;
  double reward = 0.0;   ///< shaped reward
  double mu_prob = 1.0;  ///< behavior probability of the taken action
  bool done = false;
};

/// One episode (or a truncated prefix of one) as collected by an actor.
struct Trajectory {
  std::vector<StepRecord> steps;
  int bootstrap_state = 0;           ///< state after the last step
  std::optional<double> temperature; ///< the episode's tau
  double episode_return = 0.0;       ///< sum of shaped rewards
  double raw_return = 0.0;
  double mean_entropy = 0.0;         ///< average behavior entropy over steps
  std::uint64_t params_version = 0;  ///< newest params version used while acting
  int actor = 0;

  bool terminated() const { return !steps.empty() && steps.back().done; }
};

inline void validate_trajectory(const Trajectory& traj) {
  if (traj.steps.empty()) throw InvalidTrajectory("trajectory has no steps");
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& step = traj.steps[t];
    if (!(step.mu_prob > 0.0) || step.mu_prob > 1.0) {
      throw InvalidTrajectory("behavior probability must lie in (0, 1]");
    }
    if (step.done && t + 1 != traj.steps.size()) throw InvalidTrajectory("done flag before the final step");
  }
}

}  // namespace dice
