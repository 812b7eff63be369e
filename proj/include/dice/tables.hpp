#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dice {

using Rng = std::mt19937_64;

/// V(s), one entry per state.
using StateTable = Eigen::VectorXd;
/// Q(s,a) or A(s,a); row-major so a state's row is a contiguous span.
using StateActionTable = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// pi(a|s) stored row per state; every row is a distribution.
using PolicyTable = StateActionTable;

inline std::span<const double> row_span(const StateActionTable& table, Eigen::Index s) {
  return {table.data() + s * table.cols(), static_cast<std::size_t>(table.cols())};
}

inline std::span<double> row_span(StateActionTable& table, Eigen::Index s) {
  return {table.data() + s * table.cols(), static_cast<std::size_t>(table.cols())};
}

/// Inverse-CDF draw from a (possibly unnormalized) non-negative weight vector.
template <class Generator>
std::size_t sample_index(std::span<const double> weights, Generator& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cumulative += weights[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

/// Row-wise expectation sum_a pi(a|s) X(s,a).
inline StateTable policy_expectation(const PolicyTable& pi, const StateActionTable& values) {
  return pi.cwiseProduct(values).rowwise().sum();
}

inline double sup_norm(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace dice
