#pragma once

// Direct double-sum forms of the trace estimators, written straight from the
// series definitions with explicit products.

#include <algorithm>
#include <vector>

#include "dice/tables.hpp"
#include "dice/trajectory.hpp"

namespace oracle {

struct Clips {
  double c_bar;
  double rho_bar;
  double gamma;
};

inline double ratio_at(const dice::Trajectory& tr, const dice::PolicyTable& pi, std::size_t u) {
  const auto& st = tr.steps[u];
  return pi(st.state, st.action) / st.mu_prob;
}

inline double c_at(const dice::Trajectory& tr, const dice::PolicyTable& pi, std::size_t u, const Clips& k) {
  return std::min(ratio_at(tr, pi, u), k.c_bar);
}

inline double rho_at(const dice::Trajectory& tr, const dice::PolicyTable& pi, std::size_t u, const Clips& k) {
  return std::min(ratio_at(tr, pi, u), k.rho_bar);
}

/// Product of c_u for u in [i, j]; 1 when j < i.
inline double c_product(const dice::Trajectory& tr, const dice::PolicyTable& pi, long i, long j, const Clips& k) {
  double p = 1.0;
  for (long u = i; u <= j; ++u) p *= c_at(tr, pi, static_cast<std::size_t>(u), k);
  return p;
}

inline double value_after(const dice::Trajectory& tr, const dice::StateTable& v, std::size_t u) {
  if (u + 1 < tr.steps.size()) return v(tr.steps[u + 1].state);
  return tr.steps.back().done ? 0.0 : v(tr.bootstrap_state);
}

inline double action_value_after(const dice::Trajectory& tr, const dice::StateActionTable& q,
                                 const dice::PolicyTable& pi, std::size_t u) {
  if (u + 1 < tr.steps.size()) return q(tr.steps[u + 1].state, tr.steps[u + 1].action);
  if (tr.steps.back().done) return 0.0;
  double e = 0.0;
  for (Eigen::Index a = 0; a < q.cols(); ++a) e += pi(tr.bootstrap_state, a) * q(tr.bootstrap_state, a);
  return e;
}

inline std::vector<double> vtrace_sum(const dice::Trajectory& tr, const dice::StateTable& v,
                                      const dice::PolicyTable& pi, const Clips& k) {
  const std::size_t n = tr.steps.size();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double total = v(tr.steps[t].state);
    double discount = 1.0;
    for (std::size_t u = t; u < n; ++u) {
      const double delta = tr.steps[u].reward + k.gamma * value_after(tr, v, u) - v(tr.steps[u].state);
      total += discount * c_product(tr, pi, static_cast<long>(t), static_cast<long>(u) - 1, k) * rho_at(tr, pi, u, k) *
               delta;
      discount *= k.gamma;
    }
    out[t] = total;
  }
  return out;
}

inline std::vector<double> retrace_sum(const dice::Trajectory& tr, const dice::StateActionTable& q,
                                       const dice::PolicyTable& pi, const Clips& k) {
  const std::size_t n = tr.steps.size();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& st = tr.steps[t];
    double total = q(st.state, st.action);
    double discount = 1.0;
    for (std::size_t u = t; u < n; ++u) {
      const auto& su = tr.steps[u];
      const double delta = su.reward + k.gamma * action_value_after(tr, q, pi, u) - q(su.state, su.action);
      total += discount * c_product(tr, pi, static_cast<long>(t) + 1, static_cast<long>(u), k) * delta;
      discount *= k.gamma;
    }
    out[t] = total;
  }
  return out;
}

inline double dr_delta(const dice::Trajectory& tr, const dice::StateTable& v, const dice::StateActionTable& q,
                       std::size_t u, const Clips& k) {
  const auto& su = tr.steps[u];
  return su.reward + k.gamma * value_after(tr, v, u) - q(su.state, su.action);
}

inline std::vector<double> drtrace_v_sum(const dice::Trajectory& tr, const dice::StateTable& v,
                                         const dice::StateActionTable& q, const dice::PolicyTable& pi,
                                         const Clips& k) {
  const std::size_t n = tr.steps.size();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double total = v(tr.steps[t].state);
    double discount = 1.0;
    for (std::size_t u = t; u < n; ++u) {
      total += discount * c_product(tr, pi, static_cast<long>(t), static_cast<long>(u) - 1, k) * rho_at(tr, pi, u, k) *
               dr_delta(tr, v, q, u, k);
      discount *= k.gamma;
    }
    out[t] = total;
  }
  return out;
}

inline std::vector<double> drtrace_q_sum(const dice::Trajectory& tr, const dice::StateTable& v,
                                         const dice::StateActionTable& q, const dice::PolicyTable& pi,
                                         const Clips& k) {
  const std::size_t n = tr.steps.size();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& st = tr.steps[t];
    double total = q(st.state, st.action);
    for (std::size_t kk = 0; t + kk < n; ++kk) {
      double rho_tilde = 1.0;
      for (std::size_t i = 1; i <= kk; ++i) rho_tilde *= rho_at(tr, pi, t + i, k);
      const double c = c_product(tr, pi, static_cast<long>(t) + 1, static_cast<long>(t + kk) - 1, k);
      double discount = 1.0;
      for (std::size_t i = 0; i < kk; ++i) discount *= k.gamma;
      total += discount * c * rho_tilde * dr_delta(tr, v, q, t + kk, k);
    }
    out[t] = total;
  }
  return out;
}

}  // namespace oracle
