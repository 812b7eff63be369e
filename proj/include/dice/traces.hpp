#pragma once

// Off-policy return targets from sampled trajectories. Notation, per step t of a
// trajectory of length T:
//   ratio_t = pi(a_t|s_t) / mu_t,  rho_t = min(ratio_t, rho_bar),  c_t = min(ratio_t, c_bar)
//   c[i:j]  = c_i ... c_j, empty product (j < i) = 1
//   rhos[t,k] = rho_{t+1} ... rho_{t+k}, rhos[t,0] = 1
// Every estimator is evaluated by a backward recursion; tests hold them against
// the direct double sums.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dice/errors.hpp"
#include "dice/tables.hpp"
#include "dice/trajectory.hpp"

namespace dice {

struct TraceConfig {
  double c_bar = 1.05;
  double rho_bar = 1.05;
  double gamma = 0.997;
  /// Truncation horizon for the exact operators; unset means "choose for tolerance 1e-8".
  std::optional<int> k_max;
  /// Truncated (non-done) trajectories bootstrap from V(bootstrap_state).
  bool bootstrap = true;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("trace config: gamma must lie in (0, 1)");
    if (!(c_bar >= 1.0)) throw InvalidArgument("trace config: c_bar must be >= 1");
    if (!(rho_bar >= c_bar)) throw InvalidArgument("trace config: rho_bar must be >= c_bar");
  }
};

struct StepWeights {
  double ratio = 1.0;
  double rho = 1.0;
  double c = 1.0;
};

inline std::vector<StepWeights> importance_weights(const Trajectory& traj, const PolicyTable& pi,
                                                   const TraceConfig& cfg) {
  validate_trajectory(traj);
  std::vector<StepWeights> out(traj.steps.size());
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& step = traj.steps[t];
    const double ratio = pi(step.state, step.action) / step.mu_prob;
    out[t] = {ratio, std::min(ratio, cfg.rho_bar), std::min(ratio, cfg.c_bar)};
  }
  return out;
}

namespace detail {

/// V(s_{t+1}) for each step, honoring terminal and bootstrap conventions.
inline std::vector<double> next_state_values(const Trajectory& traj, const StateTable& v, const TraceConfig& cfg) {
  const std::size_t n = traj.steps.size();
  std::vector<double> next(n);
  for (std::size_t t = 0; t + 1 < n; ++t) next[t] = v(traj.steps[t + 1].state);
  next[n - 1] = (traj.terminated() || !cfg.bootstrap) ? 0.0 : v(traj.bootstrap_state);
  return next;
}

/// Q(s_{t+1}, a_{t+1}); past the end of a truncated trajectory, E_pi[Q(bootstrap_state, .)].
inline std::vector<double> next_action_values(const Trajectory& traj, const StateActionTable& q,
                                              const PolicyTable& pi, const TraceConfig& cfg) {
  const std::size_t n = traj.steps.size();
  std::vector<double> next(n);
  for (std::size_t t = 0; t + 1 < n; ++t) next[t] = q(traj.steps[t + 1].state, traj.steps[t + 1].action);
  if (traj.terminated() || !cfg.bootstrap) {
    next[n - 1] = 0.0;
  } else {
    next[n - 1] = pi.row(traj.bootstrap_state).dot(q.row(traj.bootstrap_state));
  }
  return next;
}

/// r_t + gamma V(s_{t+1}) - Q(s_t, a_t).
inline std::vector<double> dr_deltas(const Trajectory& traj, const StateTable& v, const StateActionTable& q,
                                     const TraceConfig& cfg) {
  const auto next = next_state_values(traj, v, cfg);
  std::vector<double> delta(traj.steps.size());
  for (std::size_t t = 0; t < delta.size(); ++t) {
    const auto& step = traj.steps[t];
    delta[t] = step.reward + cfg.gamma * next[t] - q(step.state, step.action);
  }
  return delta;
}

}  // namespace detail

/// V-Trace: vs_t = V(s_t) + rho_t delta_t + gamma c_t (vs_{t+1} - V(s_{t+1})),
/// delta_t = r_t + gamma V(s_{t+1}) - V(s_t).
inline std::vector<double> vtrace_targets(const Trajectory& traj, const StateTable& v, const PolicyTable& pi,
                                          const TraceConfig& cfg) {
  cfg.validate();
  const auto w = importance_weights(traj, pi, cfg);
  const auto next = detail::next_state_values(traj, v, cfg);
  const std::size_t n = traj.steps.size();
  std::vector<double> vs(n);
  double carry = 0.0;  // vs_{t+1} - V(s_{t+1})
  for (std::size_t i = n; i-- > 0;) {
    const auto& step = traj.steps[i];
    const double delta = step.reward + cfg.gamma * next[i] - v(step.state);
    carry = w[i].rho * delta + cfg.gamma * w[i].c * carry;
    vs[i] = v(step.state) + carry;
  }
  return vs;
}

/// ReTrace: qs_t = Q_t + delta_t + gamma c_{t+1} (qs_{t+1} - Q_{t+1}),
/// delta_t = r_t + gamma Q(s_{t+1}, a_{t+1}) - Q(s_t, a_t).
inline std::vector<double> retrace_targets(const Trajectory& traj, const StateActionTable& q, const PolicyTable& pi,
                                           const TraceConfig& cfg) {
  cfg.validate();
  const auto w = importance_weights(traj, pi, cfg);
  const auto next = detail::next_action_values(traj, q, pi, cfg);
  const std::size_t n = traj.steps.size();
  std::vector<double> qs(n);
  double carry = 0.0;  // qs_{t+1} - Q_{t+1}
  for (std::size_t i = n; i-- > 0;) {
    const auto& step = traj.steps[i];
    const double delta = step.reward + cfg.gamma * next[i] - q(step.state, step.action);
    const double trace = (i + 1 < n) ? w[i + 1].c : 0.0;
    carry = delta + cfg.gamma * trace * carry;
    qs[i] = q(step.state, step.action) + carry;
  }
  return qs;
}

/// DR-trace, value form: V-Trace with the residual r_t + gamma V(s_{t+1}) - Q(s_t, a_t).
inline std::vector<double> drtrace_v_targets(const Trajectory& traj, const StateTable& v, const StateActionTable& q,
                                             const PolicyTable& pi, const TraceConfig& cfg) {
  cfg.validate();
  const auto w = importance_weights(traj, pi, cfg);
  const auto delta = detail::dr_deltas(traj, v, q, cfg);
  const std::size_t n = traj.steps.size();
  std::vector<double> vs(n);
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    carry = w[i].rho * delta[i] + cfg.gamma * w[i].c * carry;
    vs[i] = v(traj.steps[i].state) + carry;
  }
  return vs;
}

/// DR-trace, action-value form:
///   qs_t = Q_t + sum_k gamma^k c[t+1:t+k-1] rhos[t,k] delta_{t+k}.
/// With X_t = qs_t - Q_t this satisfies
///   X_t = delta_t + gamma rho_{t+1} (delta_{t+1} + c_{t+1} (X_{t+1} - delta_{t+1})).
inline std::vector<double> drtrace_q_targets(const Trajectory& traj, const StateTable& v, const StateActionTable& q,
                                             const PolicyTable& pi, const TraceConfig& cfg) {
  cfg.validate();
  const auto w = importance_weights(traj, pi, cfg);
  const auto delta = detail::dr_deltas(traj, v, q, cfg);
  const std::size_t n = traj.steps.size();
  std::vector<double> qs(n);
  double carry = 0.0;  // X_{t+1}
  for (std::size_t i = n; i-- > 0;) {
    double x = delta[i];
    if (i + 1 < n) x += cfg.gamma * w[i + 1].rho * (delta[i + 1] + w[i + 1].c * (carry - delta[i + 1]));
    carry = x;
    const auto& step = traj.steps[i];
    qs[i] = q(step.state, step.action) + x;
  }
  return qs;
}

}  // namespace dice
