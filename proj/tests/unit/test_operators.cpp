#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dice/mdp.hpp"
#include "dice/operators.hpp"
#include "oracles/random_instances.hpp"
#include "oracles/tabular.hpp"

using namespace dice;

namespace {

TraceConfig config(double gamma, double c_bar = 1.05, double rho_bar = 1.05, std::optional<int> k_max = {}) {
  TraceConfig c;
  c.gamma = gamma;
  c.c_bar = c_bar;
  c.rho_bar = rho_bar;
  c.k_max = k_max;
  return c;
}

StateActionTable centred_q(const StateActionTable& a, const StateTable& v, const PolicyTable& pi) {
  StateActionTable q = a;
  q.colwise() += v - policy_expectation(pi, a);
  return q;
}

}  // namespace

TEST(ExactOperators, DynamicProgramMatchesPathEnumeration) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int ns = 2 + trial % 2, na = 2;
    const auto mdp = oracle::random_mdp(ns, na, 0.9, rng);
    const auto mu = oracle::random_policy(ns, na, rng);
    const auto pi = oracle::random_policy(ns, na, rng);
    const auto q = oracle::random_table(ns, na, rng);
    const auto v = oracle::random_values(ns, rng);
    for (int k_max : {1, 2, 4}) {
      const auto cfg = config(0.9, 1.05, 1.2, k_max);
      const oracle::OperatorInputs in{mdp, mu, pi, q, v, 1.05, 1.2, 0.9};
      const auto s_out = exact_S_operator(mdp, mu, pi, q, v, cfg);
      const auto t_out = exact_T_operator(mdp, mu, pi, q, v, cfg);
      EXPECT_EQ(s_out.k_max, k_max);
      for (int s = 0; s < ns; ++s) {
        EXPECT_NEAR(s_out.v(s), oracle::enumerate_S(in, s, k_max), 1e-12);
        for (int a = 0; a < na; ++a) EXPECT_NEAR(t_out.q(s, a), oracle::enumerate_T(in, s, a, k_max), 1e-12);
      }
    }
  }
}

TEST(ExactOperators, RejectsBadHorizon) {
  std::mt19937_64 rng(32);
  const auto mdp = oracle::random_mdp(2, 2, 0.9, rng);
  const auto pi = oracle::random_policy(2, 2, rng);
  const auto q = oracle::random_table(2, 2, rng);
  const auto v = oracle::random_values(2, rng);
  EXPECT_THROW(exact_S_operator(mdp, pi, pi, q, v, config(0.9, 1.05, 1.05, 0)), InvalidArgument);
  EXPECT_THROW(exact_T_operator(mdp, pi, pi, q, v, config(0.9, 1.05, 1.05, -3)), InvalidArgument);
}

TEST(ExactOperators, AutoHorizonMeetsTolerance) {
  std::mt19937_64 rng(33);
  const auto mdp = oracle::random_mdp(3, 2, 0.99, rng);
  const auto mu = oracle::random_policy(3, 2, rng);
  const auto pi = oracle::random_policy(3, 2, rng);
  const auto q = oracle::random_table(3, 2, rng);
  const auto v = oracle::random_values(3, rng);
  const auto s_out = exact_S_operator(mdp, mu, pi, q, v, config(0.99));
  EXPECT_LE(s_out.truncation_bound, 1e-8);
  const auto longer = exact_S_operator(mdp, mu, pi, q, v, config(0.99, 1.05, 1.05, 2 * s_out.k_max));
  EXPECT_LE((s_out.v - longer.v).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ExactOperators, MyopicLimit) {
  std::mt19937_64 rng(34);
  const auto mdp = oracle::random_mdp(3, 2, 0.5, rng);
  const auto mu = oracle::random_policy(3, 2, rng);
  const auto pi = oracle::random_policy(3, 2, rng);
  const auto q = oracle::random_table(3, 2, rng);
  const auto v = oracle::random_values(3, rng);
  const auto out = exact_S_operator(mdp, mu, pi, q, v, config(1e-9));
  for (int s = 0; s < 3; ++s) {
    double expect = v(s);
    for (int a = 0; a < 2; ++a) {
      expect += mu(s, a) * std::min(pi(s, a) / mu(s, a), 1.05) * (mdp.rewards(s, a) - q(s, a));
    }
    EXPECT_NEAR(out.v(s), expect, 1e-7);
  }
}

TEST(ExactOperators, OnPolicyUnclippedFixedPoint) {
  std::mt19937_64 rng(35);
  const double inf = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 5; ++trial) {
    const auto mdp = oracle::random_mdp(3, 2, 0.9, rng);
    const auto pi = oracle::random_policy(3, 2, rng);
    const auto exact = exact_policy_values(mdp, pi);
    const auto out = exact_U_operator(mdp, pi, pi, exact.q, exact.v, config(0.9, inf, inf));
    EXPECT_LE((out.q - exact.q).cwiseAbs().maxCoeff(), 1e-8 + out.truncation_bound);
    EXPECT_LE((out.v - exact.v).cwiseAbs().maxCoeff(), 1e-8 + out.truncation_bound);
  }
}

TEST(ExactOperators, CentredQOperatorContracts) {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mdp = oracle::random_mdp(3, 2, 0.9, rng);
    const auto mu = oracle::random_policy(3, 2, rng);
    const auto pi = oracle::random_policy(3, 2, rng);
    const auto v = oracle::random_values(3, rng);
    const auto q1 = centred_q(oracle::random_table(3, 2, rng), v, pi);
    const auto q2 = centred_q(oracle::random_table(3, 2, rng), v, pi);
    const auto cfg = config(0.9);
    auto t_tilde = [&](const StateActionTable& q) {
      StateActionTable out = exact_T_operator(mdp, mu, pi, q, v, cfg).q;
      out.colwise() -= policy_expectation(pi, q);
      return out;
    };
    const double lhs = (t_tilde(q1) - t_tilde(q2)).cwiseAbs().maxCoeff();
    EXPECT_LE(lhs, 0.9 * (q1 - q2).cwiseAbs().maxCoeff() + 1e-8);
  }
}

TEST(ExactOperators, VOperatorContractsOnVTraceBound) {
  // S is V-Trace on the reward r - A_bar, whose modulus is 1 - (1 - gamma) min_s E_mu[rho].
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mdp = oracle::random_mdp(3, 2, 0.9, rng);
    const auto mu = oracle::random_policy(3, 2, rng);
    const auto pi = oracle::random_policy(3, 2, rng);
    const auto a = oracle::random_table(3, 2, rng);
    const auto v1 = oracle::random_values(3, rng);
    const auto v2 = oracle::random_values(3, rng);
    const auto cfg = config(0.9);
    const auto s1 = exact_S_operator(mdp, mu, pi, centred_q(a, v1, pi), v1, cfg);
    const auto s2 = exact_S_operator(mdp, mu, pi, centred_q(a, v2, pi), v2, cfg);
    double min_rho_mass = 1.0;
    for (int s = 0; s < 3; ++s) {
      double m = 0.0;
      for (int b = 0; b < 2; ++b) m += std::min(pi(s, b), 1.05 * mu(s, b));
      min_rho_mass = std::min(min_rho_mass, m);
    }
    const double modulus = 1.0 - (1.0 - 0.9) * min_rho_mass;
    EXPECT_LE((s1.v - s2.v).cwiseAbs().maxCoeff(), modulus * (v1 - v2).cwiseAbs().maxCoeff() + 1e-8);
  }
}

TEST(ExactOperators, JointUpdateConvergesToUnclippedValues) {
  // The centred update's fixed point is the target policy's own (Q, V).
  std::mt19937_64 rng(38);
  const auto mdp = oracle::random_mdp(3, 2, 0.9, rng);
  const auto mu = oracle::random_policy(3, 2, rng);
  const auto pi = oracle::random_policy(3, 2, rng);
  const auto exact = oracle::iterate_policy_values(mdp, pi);
  StateActionTable q = oracle::random_table(3, 2, rng);
  StateTable v = oracle::random_values(3, rng);
  for (int it = 0; it < 400; ++it) {
    const auto out = exact_U_operator(mdp, mu, pi, q, v, config(0.9));
    q = out.q;
    v = out.v;
  }
  EXPECT_LE((q - exact.q).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((v - exact.v).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(TruncationHorizon, Behaviour) {
  EXPECT_EQ(truncation_horizon(0.9, 1.0, 0.0, 1e-8), 1);
  const int k = truncation_horizon(0.9, 1.0, 1.0, 1e-8);
  EXPECT_LE(geometric_tail(0.9, 1.0, 1.0, k), 1e-8);
  EXPECT_GT(geometric_tail(0.9, 1.0, 1.0, k - 1), 1e-8);
  EXPECT_THROW(truncation_horizon(0.9, 1.2, 1.0, 1e-8), InvalidArgument);
}
