#pragma once

// Boltzmann temperature family over action values, entropy utilities, advantage
// centering with stop-gradient routing, and the temperature <-> bandit-domain map.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dice/errors.hpp"

namespace dice {

using ActionValues = std::vector<double>;
using PolicyDistribution = std::vector<double>;

/// Temperature bounds. 1/tau is searched over [0, 50]; tau = infinity is capped
/// where the policy is uniform to machine precision.
inline constexpr double kTauMin = 0.02;
inline constexpr double kTauMax = 1e6;

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
  if (v.empty()) throw InvalidArgument(std::string(what) + ": empty action vector");
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": non-finite entry");
  }
}

inline void require_positive_tau(double tau, const char* what) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument(std::string(what) + ": temperature must be positive and finite");
  }
}

}  // namespace detail

/// pi_tau(v) proportional to exp(v / tau), evaluated with max-subtraction.
inline PolicyDistribution boltzmann_policy(std::span<const double> v, double tau) {
  detail::require_finite(v, "boltzmann_policy");
  detail::require_positive_tau(tau, "boltzmann_policy");
  const double top = *std::max_element(v.begin(), v.end());
  PolicyDistribution p(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    p[i] = std::exp((v[i] - top) / tau);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

/// Shannon entropy in nats, with 0 ln 0 = 0.
inline double entropy(std::span<const double> pi) {
  double h = 0.0;
  for (double p : pi) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

inline double expectation(std::span<const double> v, std::span<const double> pi) {
  if (v.size() != pi.size()) throw InvalidArgument("expectation: length mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) e += pi[i] * v[i];
  return e;
}

inline double variance(std::span<const double> v, std::span<const double> pi) {
  const double mean = expectation(v, pi);
  double var = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) var += pi[i] * (v[i] - mean) * (v[i] - mean);
  return var;
}

/// Finds tau with H[pi_tau(v)] = target by bisection on ln(tau) over [kTauMin, kTauMax].
/// Entropy is strictly increasing in tau for non-constant v.
inline double solve_temperature_for_entropy(std::span<const double> v, double target,
                                            double tolerance = 1e-8, int max_iterations = 200) {
  detail::require_finite(v, "solve_temperature_for_entropy");
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  if (*lo_it == *hi_it) {
    throw DegenerateInput("solve_temperature_for_entropy: constant action values");
  }
  const double h_max = std::log(static_cast<double>(v.size()));
  if (!(target > 0.0) || !(target < h_max)) {
    throw OutOfRange("solve_temperature_for_entropy: target must lie in (0, ln|A|)");
  }
  auto h_at = [&](double log_tau) { return entropy(boltzmann_policy(v, std::exp(log_tau))); };
  double lo = std::log(kTauMin);
  double hi = std::log(kTauMax);
  if (h_at(lo) > target || h_at(hi) < target) {
    throw OutOfRange("solve_temperature_for_entropy: target not reachable inside the temperature domain");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < max_iterations; ++i) {
    mid = 0.5 * (lo + hi);
    const double h = h_at(mid);
    if (std::abs(h - target) <= tolerance) break;
    (h < target ? lo : hi) = mid;
  }
  return std::exp(mid);
}

/// A - E_pi[A]. The subtracted expectation is a stop-gradient constant for learning
/// unless routing says otherwise (see centered_q_jacobian).
inline ActionValues centered_advantage(std::span<const double> a_row, std::span<const double> pi) {
  if (a_row.size() != pi.size()) throw InvalidArgument("centered_advantage: length mismatch");
  const double baseline = expectation(a_row, pi);
  ActionValues out(a_row.begin(), a_row.end());
  for (double& x : out) x -= baseline;
  return out;
}

inline ActionValues q_from_advantage(std::span<const double> a_bar, double value) {
  ActionValues q(a_bar.begin(), a_bar.end());
  for (double& x : q) x += value;
  return q;
}

/// Which sub-expressions of Q = A - pi.A + V pass gradients.
struct GradientRouting {
  bool stop_policy = true;  ///< pi in the baseline is sg(pi)
  bool stop_value = true;   ///< V enters Q as sg(V)
};

/// Row-major |A|x|A| Jacobian dQ(a)/dA(b) for Q = A - pi(A/tau).A + V.
/// With a stopped policy this is I - 1 pi^T; otherwise the softmax derivative
/// adds -pi_b (A_b - E_pi[A]) / tau to every row.
inline std::vector<double> centered_q_jacobian(std::span<const double> a_row, std::span<const double> pi,
                                               double tau, bool stop_policy) {
  const std::size_t n = a_row.size();
  if (pi.size() != n) throw InvalidArgument("centered_q_jacobian: length mismatch");
  std::vector<double> jac(n * n, 0.0);
  const double mean = expectation(a_row, pi);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      double d = (a == b ? 1.0 : 0.0) - pi[b];
      if (!stop_policy) d -= pi[b] * (a_row[b] - mean) / tau;
      jac[a * n + b] = d;
    }
  }
  return jac;
}

/// d log pi_tau(action) / dA = (e_action - pi) / tau.
inline std::vector<double> log_policy_gradient(std::span<const double> pi, std::size_t action, double tau) {
  std::vector<double> g(pi.size());
  for (std::size_t b = 0; b < pi.size(); ++b) g[b] = ((b == action ? 1.0 : 0.0) - pi[b]) / tau;
  return g;
}

/// d/dtau of E_{pi_tau}[v] in closed form: -Var_pi[v] / tau^2.
inline double expected_value_tau_derivative(std::span<const double> v, double tau) {
  const auto pi = boltzmann_policy(v, tau);
  return -variance(v, pi) / (tau * tau);
}

/// x = ln(1 + 1/tau), the coordinate the bandits operate on.
inline double tau_to_x(double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("tau_to_x: tau must be positive");
  return std::log1p(1.0 / tau);
}

/// tau = 1 / (exp(x) - 1).
inline double x_to_tau(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("x_to_tau: x must be positive and finite");
  return 1.0 / std::expm1(x);
}

/// Finite-support distribution over temperatures (an Omega).
struct DiscreteDistribution {
  std::vector<double> support;
  std::vector<double> weights;
};

/// E_{tau ~ omega}[ E_{pi_tau}[v] ].
inline double average_policy_value(std::span<const double> v, const DiscreteDistribution& omega) {
  if (omega.support.size() != omega.weights.size()) {
    throw InvalidArgument("average_policy_value: support/weight size mismatch");
  }
  double f = 0.0;
  for (std::size_t i = 0; i < omega.support.size(); ++i) {
    f += omega.weights[i] * expectation(v, boltzmann_policy(v, omega.support[i]));
  }
  return f;
}

/// Exact W1 between two 1-D discrete distributions: integral of |F1 - F2|.
inline double wasserstein1(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  struct Atom {
    double x;
    double dp;
    double dq;
  };
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < p.support.size(); ++i) atoms.push_back({p.support[i], p.weights[i], 0.0});
  for (std::size_t i = 0; i < q.support.size(); ++i) atoms.push_back({q.support[i], 0.0, q.weights[i]});
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
  double w = 0.0;
  double cdf_gap = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cdf_gap += atoms[i].dp - atoms[i].dq;
    w += std::abs(cdf_gap) * (atoms[i + 1].x - atoms[i].x);
  }
  return w;
}

}  // namespace dice
