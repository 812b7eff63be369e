#pragma once

// Expected (exact) forms of the DR-trace estimators on a tabular MDP. With
//   delta(s,a) = R(s,a) + gamma (P V)(s,a) - Q(s,a)
// the expectation over mu-sampled continuations is propagated as a state
// measure: one step of the c-weighted trace maps a state-row h to
//   (M_c h)(s) = sum_a mu(a|s) c(s,a) sum_s' P(s'|s,a) h(s').
// Both series are evaluated by Horner's rule, so cost is linear in k_max.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "dice/errors.hpp"
#include "dice/mdp.hpp"
#include "dice/tables.hpp"
#include "dice/traces.hpp"

namespace dice {

inline constexpr double kOperatorTolerance = 1e-8;

struct QOperatorResult {
  StateActionTable q;
  double truncation_bound = 0.0;
  int k_max = 0;
};

struct VOperatorResult {
  StateTable v;
  double truncation_bound = 0.0;
  int k_max = 0;
};

struct JointOperatorResult {
  StateActionTable q;
  StateTable v;
  double truncation_bound = 0.0;
};

/// mu(a|s) * min(ratio, clip), written so infinite clips and mu = 0 stay finite.
inline double clipped_mass(double pi, double mu, double clip) {
  if (mu <= 0.0) return 0.0;
  return std::isinf(clip) ? pi : std::min(pi, clip * mu);
}

/// sum_{k > k_max} scale (gamma w)^k; infinite when gamma w >= 1.
inline double geometric_tail(double gamma, double w, double scale, int k_max) {
  const double q = gamma * w;
  if (scale == 0.0) return 0.0;
  if (q >= 1.0) return std::numeric_limits<double>::infinity();
  return scale * std::pow(q, k_max + 1) / (1.0 - q);
}

/// Smallest k >= 1 whose geometric tail is <= tol.
inline int truncation_horizon(double gamma, double w, double scale, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("truncation_horizon: tolerance must be positive");
  const double q = gamma * w;
  if (scale == 0.0) return 1;
  if (q >= 1.0) throw InvalidArgument("truncation_horizon: trace weights do not contract");
  const double need = std::log(tol * (1.0 - q) / scale) / std::log(q) - 1.0;
  int k = std::max(1, static_cast<int>(std::ceil(need)));
  while (k > 1 && geometric_tail(gamma, w, scale, k - 1) <= tol) --k;
  while (geometric_tail(gamma, w, scale, k) > tol) ++k;
  return k;
}

namespace detail {

struct OperatorPieces {
  StateActionTable delta;
  StateTable d_rho;            ///< sum_a mu rho delta
  Eigen::MatrixXd m_c;         ///< c-weighted one-step state measure
  Eigen::MatrixXd m_rc;        ///< rho c-weighted one-step state measure
  double delta_bound = 0.0;    ///< max |delta|
  double rho_mass = 0.0;       ///< max_s sum_a mu rho
  double c_mass = 1.0;         ///< max(1, max_s sum_a mu c)
  double rc_mass = 1.0;        ///< max(1, max_s sum_a mu rho c)
};

inline void check_inputs(const TabularMdp& mdp, const PolicyTable& mu, const PolicyTable& pi,
                         const StateActionTable& q, const StateTable& v, const TraceConfig& cfg) {
  mdp.validate();
  cfg.validate();
  validate_policy_table(mdp, mu, "behavior policy");
  validate_policy_table(mdp, pi, "target policy");
  if (q.rows() != mdp.num_states || q.cols() != mdp.num_actions || v.size() != mdp.num_states) {
    throw InvalidArgument("operator: value tables have the wrong shape");
  }
  if (cfg.k_max && *cfg.k_max < 1) throw InvalidArgument("operator: k_max must be >= 1");
}

inline OperatorPieces operator_pieces(const TabularMdp& mdp, const PolicyTable& mu, const PolicyTable& pi,
                                      const StateActionTable& q, const StateTable& v, const TraceConfig& cfg) {
  const int ns = mdp.num_states;
  const int na = mdp.num_actions;
  OperatorPieces out;
  out.delta = bellman_backup(mdp, v, cfg.gamma) - q;
  out.d_rho = StateTable::Zero(ns);
  out.m_c = Eigen::MatrixXd::Zero(ns, ns);
  out.m_rc = Eigen::MatrixXd::Zero(ns, ns);
  for (int s = 0; s < ns; ++s) {
    double rho_row = 0.0;
    double c_row = 0.0;
    double rc_row = 0.0;
    for (int a = 0; a < na; ++a) {
      const double w_rho = clipped_mass(pi(s, a), mu(s, a), cfg.rho_bar);
      const double w_c = clipped_mass(pi(s, a), mu(s, a), cfg.c_bar);
      const double w_rc = mu(s, a) > 0.0 ? w_rho * w_c / mu(s, a) : 0.0;
      out.d_rho(s) += w_rho * out.delta(s, a);
      rho_row += w_rho;
      c_row += w_c;
      rc_row += w_rc;
      const auto next = mdp.next_state_distribution(s, a);
      for (int n = 0; n < ns; ++n) {
        out.m_c(s, n) += w_c * next[n];
        out.m_rc(s, n) += w_rc * next[n];
      }
    }
    out.rho_mass = std::max(out.rho_mass, rho_row);
    out.c_mass = std::max(out.c_mass, c_row);
    out.rc_mass = std::max(out.rc_mass, rc_row);
  }
  out.delta_bound = sup_norm(out.delta);
  return out;
}

}  // namespace detail

/// V-form operator:
///   S(V)(s) = V(s) + sum_{k=0..k_max} gamma^k (M_c^k d_rho)(s).
inline VOperatorResult exact_S_operator(const TabularMdp& mdp, const PolicyTable& mu, const PolicyTable& pi,
                                        const StateActionTable& q, const StateTable& v, const TraceConfig& cfg) {
  detail::check_inputs(mdp, mu, pi, q, v, cfg);
  const auto parts = detail::operator_pieces(mdp, mu, pi, q, v, cfg);
  const double scale = parts.rho_mass * parts.delta_bound;
  VOperatorResult out;
  out.k_max = cfg.k_max ? *cfg.k_max : truncation_horizon(cfg.gamma, parts.c_mass, scale, kOperatorTolerance);
  StateTable h = parts.d_rho;
  for (int k = 0; k < out.k_max; ++k) h = parts.d_rho + cfg.gamma * (parts.m_c * h);
  out.v = v + h;
  out.truncation_bound = geometric_tail(cfg.gamma, parts.c_mass, scale, out.k_max);
  return out;
}

/// Q-form operator:
///   T(Q)(s,a) = Q(s,a) + delta(s,a) + gamma sum_{s'} P(s'|s,a) sum_{j=0..k_max-1} gamma^j (M_rc^j d_rho)(s').
inline QOperatorResult exact_T_operator(const TabularMdp& mdp, const PolicyTable& mu, const PolicyTable& pi,
                                        const StateActionTable& q, const StateTable& v, const TraceConfig& cfg) {
  detail::check_inputs(mdp, mu, pi, q, v, cfg);
  const auto parts = detail::operator_pieces(mdp, mu, pi, q, v, cfg);
  const double scale = parts.rho_mass * parts.delta_bound / parts.rc_mass;
  QOperatorResult out;
  out.k_max = cfg.k_max ? *cfg.k_max : truncation_horizon(cfg.gamma, parts.rc_mass, scale, kOperatorTolerance);
  StateTable g = parts.d_rho;
  for (int j = 1; j < out.k_max; ++j) g = parts.d_rho + cfg.gamma * (parts.m_rc * g);
  StateActionTable tail(mdp.num_states, mdp.num_actions);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const auto next = mdp.next_state_distribution(s, a);
      double e = 0.0;
      for (int n = 0; n < mdp.num_states; ++n) e += next[n] * g(n);
      tail(s, a) = cfg.gamma * e;
    }
  }
  out.q = q + parts.delta + tail;
  out.truncation_bound = geometric_tail(cfg.gamma, parts.rc_mass, scale, out.k_max);
  return out;
}

/// Joint update on (Q, V). Q enters both operators re-expressed as A_bar + V with
/// A_bar centred under pi, and the new Q is re-centred the same way:
///   Qc = Q - E_pi[Q] + V,  V' = S(V; Qc),  T' = T(Qc; V),  Q' = T' - E_pi[T'] + V'.
inline JointOperatorResult exact_U_operator(const TabularMdp& mdp, const PolicyTable& mu, const PolicyTable& pi,
                                            const StateActionTable& q, const StateTable& v, const TraceConfig& cfg) {
  detail::check_inputs(mdp, mu, pi, q, v, cfg);
  StateActionTable qc = q;
  qc.colwise() += v - policy_expectation(pi, q);
  const auto s_out = exact_S_operator(mdp, mu, pi, qc, v, cfg);
  const auto t_out = exact_T_operator(mdp, mu, pi, qc, v, cfg);
  JointOperatorResult out;
  out.v = s_out.v;
  out.q = t_out.q;
  out.q.colwise() += s_out.v - policy_expectation(pi, t_out.q);
  out.truncation_bound = 2.0 * t_out.truncation_bound + s_out.truncation_bound;
  return out;
}

}  // namespace dice
