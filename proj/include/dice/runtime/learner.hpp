#pragma once

#include <memory>
#include <random>
#include <span>
#include <vector>

#include "dice/errors.hpp"
#include "dice/policy.hpp"
#include "dice/runtime/config.hpp"
#include "dice/runtime/parameter_server.hpp"
#include "dice/tables.hpp"
#include "dice/traces.hpp"
#include "dice/trajectory.hpp"

namespace dice {

/// Row-wise softmax(A(s,.) / tau).
inline PolicyTable boltzmann_table(const StateActionTable& advantages, double tau) {
  PolicyTable pi(advantages.rows(), advantages.cols());
  for (Eigen::Index s = 0; s < advantages.rows(); ++s) {
    const auto row = boltzmann_policy(row_span(advantages, s), tau);
    for (Eigen::Index a = 0; a < advantages.cols(); ++a) pi(s, a) = row[static_cast<std::size_t>(a)];
  }
  return pi;
}

/// Q = A - E_pi[A] + V.
inline StateActionTable q_table(const StateActionTable& advantages, const StateTable& values, const PolicyTable& pi) {
  StateActionTable q = advantages;
  q.colwise() += values - policy_expectation(pi, advantages);
  return q;
}

/// Value and action-value targets for one trajectory under the configured estimator.
struct StepTargets {
  std::vector<double> vs;
  std::vector<double> qs;
};

inline StepTargets compute_targets(const Trajectory& traj, const StateTable& v, const StateActionTable& q,
                                   const PolicyTable& pi, const TraceConfig& tc, Estimator estimator) {
  if (estimator == Estimator::drtrace) {
    return {drtrace_v_targets(traj, v, q, pi, tc), drtrace_q_targets(traj, v, q, pi, tc)};
  }
  return {vtrace_targets(traj, v, pi, tc), retrace_targets(traj, q, pi, tc)};
}

/// One learner update. For every step t of every trajectory, with pi = softmax(A/tau)
/// at the trajectory's tau (or the frozen target when given) and Q = A - E_pi[A] + V:
///   V(s_t)    += xi (vs_t - V(s_t))
///   A(s_t, .) += alpha (qs_t - Q(s_t,a_t)) dQ(s_t,a_t)/dA(s_t, .)
///   A(s_t, .) += beta rho_t (r_t + gamma vs_{t+1} - V(s_t)) (e_{a_t} - pi(.|s_t))
/// and, when no_stop_v is set, V(s_t) also receives the Q-loss error. The summed
/// direction is averaged over all steps in the batch and scaled by learning_rate.
template <class Generator>
AgentParams learner_step(const AgentParams& params, std::span<const Trajectory* const> batch, const RunConfig& cfg,
                         Generator& rng, const PolicyTable* frozen_target = nullptr) {
  if (batch.empty()) throw InvalidBatch("learner_step: empty batch");
  const auto ns = params.advantages.rows();
  const auto na = params.advantages.cols();
  if (frozen_target && (frozen_target->rows() != ns || frozen_target->cols() != na)) {
    throw InvalidBatch("learner_step: frozen target has the wrong shape");
  }
  for (const Trajectory* traj : batch) {
    if (!frozen_target && !traj->temperature) throw InvalidBatch("learner_step: trajectory without temperature");
    validate_trajectory(*traj);
    for (const auto& step : traj->steps) {
      if (step.state < 0 || step.state >= ns || step.action < 0 || step.action >= na) {
        throw InvalidBatch("learner_step: state or action out of range");
      }
    }
  }

  const TraceConfig tc = cfg.trace_config();
  const Estimator estimator = cfg.effective_estimator();
  const bool stop_policy = !cfg.flags.no_stop_pi || frozen_target != nullptr;
  std::uniform_real_distribution<double> scale_draw(0.0, 20.0);

  StateActionTable grad_a = StateActionTable::Zero(ns, na);
  StateTable grad_v = StateTable::Zero(ns);
  std::size_t steps = 0;

  for (const Trajectory* traj : batch) {
    const double tau = traj->temperature.value_or(1.0);
    const PolicyTable pi = frozen_target ? *frozen_target : boltzmann_table(params.advantages, tau);
    const StateActionTable q = q_table(params.advantages, params.values, pi);
    const auto targets = compute_targets(*traj, params.values, q, pi, tc, estimator);
    const auto weights = importance_weights(*traj, pi, tc);
    const std::size_t n = traj->steps.size();
    double tail_value = 0.0;
    if (!traj->terminated() && tc.bootstrap) tail_value = params.values(traj->bootstrap_state);

    for (std::size_t t = 0; t < n; ++t) {
      const auto& step = traj->steps[t];
      const int s = step.state;
      const int a = step.action;
      double alpha = cfg.alpha;
      double beta = cfg.beta;
      if (cfg.flags.random_scaling) {
        alpha = scale_draw(rng);
        beta = scale_draw(rng);
      }

      grad_v(s) += cfg.xi * (targets.vs[t] - params.values(s));

      const auto pi_row = row_span(pi, s);
      const double q_error = alpha * (targets.qs[t] - q(s, a));
      const auto jac = centered_q_jacobian(row_span(params.advantages, s), pi_row, tau, stop_policy);
      for (Eigen::Index b = 0; b < na; ++b) grad_a(s, b) += q_error * jac[static_cast<std::size_t>(a * na + b)];
      if (cfg.flags.no_stop_v) grad_v(s) += q_error;

      const double next_vs = t + 1 < n ? targets.vs[t + 1] : tail_value;
      const double advantage = step.reward + cfg.gamma * next_vs - params.values(s);
      const double pg = beta * weights[t].rho * advantage;
      for (Eigen::Index b = 0; b < na; ++b) grad_a(s, b) += pg * ((b == a ? 1.0 : 0.0) - pi_row[b]);
      ++steps;
    }
  }

  AgentParams next = params;
  const double scale = cfg.learning_rate / static_cast<double>(steps);
  next.advantages += scale * grad_a;
  next.values += scale * grad_v;
  next.version = params.version + 1;
  return next;
}

template <class Generator>
AgentParams learner_step(const AgentParams& params, const std::vector<Trajectory>& batch, const RunConfig& cfg,
                         Generator& rng, const PolicyTable* frozen_target = nullptr) {
  std::vector<const Trajectory*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& t : batch) ptrs.push_back(&t);
  return learner_step(params, std::span<const Trajectory* const>(ptrs), cfg, rng, frozen_target);
}

template <class Generator>
AgentParams learner_step(const AgentParams& params, const std::vector<std::shared_ptr<const Trajectory>>& batch,
                         const RunConfig& cfg, Generator& rng, const PolicyTable* frozen_target = nullptr) {
  std::vector<const Trajectory*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& t : batch) ptrs.push_back(t.get());
  return learner_step(params, std::span<const Trajectory* const>(ptrs), cfg, rng, frozen_target);
}

}  // namespace dice
