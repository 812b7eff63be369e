#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dice/errors.hpp"
#include "dice/policy.hpp"
#include "dice/tables.hpp"
#include "dice/trajectory.hpp"

namespace dice {

/// Finite MDP with deterministic per-(s,a) rewards. Terminal states are absorbing
/// with zero reward; episodes never start in one.
struct TabularMdp {
  std::string name;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> transitions;  ///< P[s][a][s'] flattened
  StateActionTable rewards;         ///< R[s][a]
  double gamma = 0.99;
  std::vector<bool> terminal;
  std::vector<double> initial;

  TabularMdp() = default;
  TabularMdp(std::string mdp_name, int states, int actions, double discount)
      : name(std::move(mdp_name)),
        num_states(states),
        num_actions(actions),
        transitions(static_cast<std::size_t>(states) * actions * states, 0.0),
        rewards(StateActionTable::Zero(states, actions)),
        gamma(discount),
        terminal(static_cast<std::size_t>(states), false),
        initial(static_cast<std::size_t>(states), 0.0) {}

  double& p(int s, int a, int next) { return transitions[index(s, a, next)]; }
  double p(int s, int a, int next) const { return transitions[index(s, a, next)]; }

  std::span<const double> next_state_distribution(int s, int a) const {
    return {transitions.data() + index(s, a, 0), static_cast<std::size_t>(num_states)};
  }

  bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)]; }

  /// Makes s absorbing with zero reward.
  void make_terminal(int s) {
    terminal[static_cast<std::size_t>(s)] = true;
    for (int a = 0; a < num_actions; ++a) {
      for (int n = 0; n < num_states; ++n) p(s, a, n) = (n == s) ? 1.0 : 0.0;
      rewards(s, a) = 0.0;
    }
  }

  void validate() const {
    if (num_states < 1 || num_actions < 1) throw InvalidArgument("mdp: need at least one state and one action");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("mdp: gamma must lie in (0, 1)");
    if (transitions.size() != static_cast<std::size_t>(num_states) * num_actions * num_states ||
        rewards.rows() != num_states || rewards.cols() != num_actions ||
        terminal.size() != static_cast<std::size_t>(num_states) ||
        initial.size() != static_cast<std::size_t>(num_states)) {
      throw InvalidArgument("mdp: table dimensions disagree with state/action counts");
    }
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        double total = 0.0;
        for (double x : next_state_distribution(s, a)) {
          if (!(x >= 0.0)) throw InvalidArgument("mdp: negative transition probability");
          total += x;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("mdp: transition row does not sum to 1");
        if (!std::isfinite(rewards(s, a))) throw InvalidArgument("mdp: non-finite reward");
      }
    }
    double mass = 0.0;
    for (int s = 0; s < num_states; ++s) {
      if (initial[s] < 0.0) throw InvalidArgument("mdp: negative initial probability");
      if (initial[s] > 0.0 && terminal[s]) throw InvalidArgument("mdp: initial mass on a terminal state");
      mass += initial[s];
    }
    if (std::abs(mass - 1.0) > 1e-12) throw InvalidArgument("mdp: initial distribution does not sum to 1");
  }

 private:
  std::size_t index(int s, int a, int next) const {
    return (static_cast<std::size_t>(s) * num_actions + a) * num_states + next;
  }
};

/// P_pi[s][s'] = sum_a pi(a|s) P[s][a][s'].
inline Eigen::MatrixXd policy_transition_matrix(const TabularMdp& mdp, const PolicyTable& pi) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const auto row = mdp.next_state_distribution(s, a);
      for (int n = 0; n < mdp.num_states; ++n) m(s, n) += pi(s, a) * row[n];
    }
  }
  return m;
}

/// (R + gamma P V)(s,a).
inline StateActionTable bellman_backup(const TabularMdp& mdp, const StateTable& v, double gamma) {
  StateActionTable q(mdp.num_states, mdp.num_actions);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const auto row = mdp.next_state_distribution(s, a);
      double next = 0.0;
      for (int n = 0; n < mdp.num_states; ++n) next += row[n] * v(n);
      q(s, a) = mdp.rewards(s, a) + gamma * next;
    }
  }
  return q;
}

inline void validate_policy_table(const TabularMdp& mdp, const PolicyTable& pi, const char* what) {
  if (pi.rows() != mdp.num_states || pi.cols() != mdp.num_actions) {
    throw InvalidArgument(std::string(what) + ": policy table has wrong shape");
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    double total = 0.0;
    for (int a = 0; a < mdp.num_actions; ++a) {
      if (!(pi(s, a) >= 0.0)) throw InvalidArgument(std::string(what) + ": negative probability");
      total += pi(s, a);
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument(std::string(what) + ": row does not sum to 1");
  }
}

struct PolicyValues {
  StateTable v;
  StateActionTable q;
  double residual = 0.0;  ///< sup-norm Bellman residual of v
};

/// Exact policy evaluation: solves (I - gamma P_pi) V = R_pi directly.
inline PolicyValues exact_policy_values(const TabularMdp& mdp, const PolicyTable& pi) {
  mdp.validate();
  validate_policy_table(mdp, pi, "exact_policy_values");
  const Eigen::MatrixXd p_pi = policy_transition_matrix(mdp, pi);
  const Eigen::VectorXd r_pi = pi.cwiseProduct(mdp.rewards).rowwise().sum();
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(mdp.num_states, mdp.num_states) - mdp.gamma * p_pi;
  PolicyValues out;
  out.v = system.partialPivLu().solve(r_pi);
  out.q = bellman_backup(mdp, out.v, mdp.gamma);
  out.residual = sup_norm(out.v - (r_pi + mdp.gamma * p_pi * out.v));
  return out;
}

/// Optimal action values by value iteration until successive sup-norm change <= tolerance.
inline PolicyValues optimal_values(const TabularMdp& mdp, double tolerance = 1e-12, int max_iterations = 1000000) {
  mdp.validate();
  StateTable v = StateTable::Zero(mdp.num_states);
  StateActionTable q;
  for (int it = 0; it < max_iterations; ++it) {
    q = bellman_backup(mdp, v, mdp.gamma);
    StateTable next = q.rowwise().maxCoeff();
    const double change = sup_norm(next - v);
    v = std::move(next);
    if (change <= tolerance) break;
  }
  q = bellman_backup(mdp, v, mdp.gamma);
  return {v, q, sup_norm(q.rowwise().maxCoeff() - v)};
}

/// Deterministic policy selecting argmax_a table(s,a), ties to the lowest index.
inline PolicyTable greedy_policy(const StateActionTable& table) {
  PolicyTable pi = PolicyTable::Zero(table.rows(), table.cols());
  for (Eigen::Index s = 0; s < table.rows(); ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < table.cols(); ++a) {
      if (table(s, a) > table(s, best)) best = a;
    }
    pi(s, best) = 1.0;
  }
  return pi;
}

/// pi~(a|s) = min{rho_bar mu(a|s), pi(a|s)} / sum_b min{rho_bar mu(b|s), pi(b|s)}.
inline PolicyTable clipped_target_policy(const PolicyTable& pi, const PolicyTable& mu, double rho_bar) {
  if (!(rho_bar > 0.0)) throw InvalidArgument("clipped_target_policy: rho_bar must be positive");
  if (pi.rows() != mu.rows() || pi.cols() != mu.cols()) {
    throw InvalidArgument("clipped_target_policy: shape mismatch");
  }
  PolicyTable out(pi.rows(), pi.cols());
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    double total = 0.0;
    for (Eigen::Index a = 0; a < pi.cols(); ++a) {
      out(s, a) = std::min(rho_bar * mu(s, a), pi(s, a));
      total += out(s, a);
    }
    if (!(total > 0.0)) throw InvalidArgument("clipped_target_policy: pi and mu have disjoint support");
    out.row(s) /= total;
  }
  return out;
}

/// sign(r) ln(|r| + 1).
inline double shaped_reward(double r) {
  return r >= 0.0 ? std::log1p(r) : -std::log1p(-r);
}

/// Rolls one episode. `behavior(s)` returns the action distribution used at s;
/// rewards are shaped at collection time and both returns are recorded.
template <class Behavior, class Generator>
Trajectory sample_episode(const TabularMdp& mdp, Behavior&& behavior, double tau, Generator& rng, int max_steps,
                          std::optional<int> start_state = std::nullopt) {
  if (max_steps < 1) throw InvalidArgument("sample_episode: max_steps must be >= 1");
  Trajectory traj;
  traj.temperature = tau;
  int s = start_state ? *start_state : static_cast<int>(sample_index(mdp.initial, rng));
  if (s < 0 || s >= mdp.num_states || mdp.is_terminal(s)) {
    throw InvalidArgument("sample_episode: start state must be a valid non-terminal state");
  }
  for (int t = 0; t < max_steps; ++t) {
    const PolicyDistribution probs = behavior(s);
    const auto a = static_cast<int>(sample_index(probs, rng));
    const int next = static_cast<int>(sample_index(mdp.next_state_distribution(s, a), rng));
    const double raw = mdp.rewards(s, a);
    StepRecord step;
    step.state = s;
    step.action = a;
    step.reward = shaped_reward(raw);
    step.mu_prob = probs[static_cast<std::size_t>(a)];
    step.done = mdp.is_terminal(next);
    traj.steps.push_back(step);
    traj.episode_return += step.reward;
    traj.raw_return += raw;
    traj.mean_entropy += entropy(probs);
    s = next;
    if (step.done) break;
  }
  traj.mean_entropy /= static_cast<double>(traj.steps.size());
  traj.bootstrap_state = s;
  return traj;
}

}  // namespace dice
