#pragma once

// Tile-coded scalar bandits and the voting ensemble that proposes episode
// temperatures. Bandits live on x = ln(1 + 1/tau); the ensemble converts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "dice/errors.hpp"
#include "dice/policy.hpp"
#include "dice/tables.hpp"

namespace dice {

enum class BanditMode { argmax, random };

inline const char* to_string(BanditMode mode) { return mode == BanditMode::argmax ? "argmax" : "random"; }

inline BanditMode bandit_mode_from_string(const std::string& s) {
  if (s == "argmax") return BanditMode::argmax;
  if (s == "random") return BanditMode::random;
  throw InvalidArgument("unknown bandit mode '" + s + "'");
}

struct Bandit {
  BanditMode mode = BanditMode::argmax;
  double l = 0.0;
  double r = 1.0;
  double acc = 1.0;
  int width = 0;
  double lr = 0.1;
  std::vector<double> w;
  std::vector<std::uint64_t> N;
  int d = 1;

  int num_tiles() const { return static_cast<int>(w.size()); }
};

/// floor((r - l) / acc), guarded so an exact ratio is not lost to rounding.
inline int tile_count(double l, double r, double acc) {
  return static_cast<int>(std::floor((r - l) / acc + 1e-9));
}

inline Bandit make_bandit(BanditMode mode, double l, double r, double acc, int width, double lr, int d) {
  if (!(l < r) || !std::isfinite(l) || !std::isfinite(r)) throw InvalidArgument("bandit: need finite l < r");
  if (!(acc > 0.0) || acc > r - l + 1e-12) throw InvalidArgument("bandit: acc must lie in (0, r - l]");
  if (width < 0) throw InvalidArgument("bandit: width must be non-negative");
  if (!(lr > 0.0 && lr <= 1.0)) throw InvalidArgument("bandit: lr must lie in (0, 1]");
  const int tiles = tile_count(l, r, acc);
  if (tiles < 1) throw InvalidArgument("bandit: domain holds no tile");
  if (d < 1 || d > tiles) throw InvalidArgument("bandit: d must lie in [1, number of tiles]");
  Bandit b;
  b.mode = mode;
  b.l = l;
  b.r = r;
  b.acc = acc;
  b.width = width;
  b.lr = lr;
  b.d = d;
  b.w.assign(static_cast<std::size_t>(tiles), 0.0);
  b.N.assign(static_cast<std::size_t>(tiles), 0);
  return b;
}

inline int tile_index(const Bandit& b, double x) {
  const double clipped = std::min(std::max(x, b.l), b.r);
  const int i = static_cast<int>(std::floor((clipped - b.l) / b.acc));
  return std::clamp(i, 0, b.num_tiles() - 1);
}

/// Window [i - width, i + width] clipped to the tile range.
inline std::pair<int, int> tile_window(const Bandit& b, int i) {
  return {std::max(0, i - b.width), std::min(b.num_tiles() - 1, i + b.width)};
}

/// V_i = mean of w over the (boundary-clipped) window around tile i.
inline std::vector<double> bandit_eval(const Bandit& b) {
  std::vector<double> v(b.w.size());
  for (int i = 0; i < b.num_tiles(); ++i) {
    const auto [lo, hi] = tile_window(b, i);
    double total = 0.0;
    for (int j = lo; j <= hi; ++j) total += b.w[static_cast<std::size_t>(j)];
    v[static_cast<std::size_t>(i)] = total / static_cast<double>(hi - lo + 1);
  }
  return v;
}

inline double bandit_eval_at(const Bandit& b, int i) {
  const auto [lo, hi] = tile_window(b, i);
  double total = 0.0;
  for (int j = lo; j <= hi; ++j) total += b.w[static_cast<std::size_t>(j)];
  return total / static_cast<double>(hi - lo + 1);
}

inline void bandit_update(Bandit& b, double x, double g) {
  if (!std::isfinite(g)) throw InvalidArgument("bandit_update: return must be finite");
  const int i = tile_index(b, x);
  const double step = b.lr * (g - bandit_eval_at(b, i));
  const auto [lo, hi] = tile_window(b, i);
  for (int j = lo; j <= hi; ++j) b.w[static_cast<std::size_t>(j)] += step;
  ++b.N[static_cast<std::size_t>(i)];
}

/// z-scored tile values plus c * sqrt(ln(1 + sum N) / (1 + N_i)).
inline std::vector<double> bandit_scores(const Bandit& b, double c) {
  const auto v = bandit_eval(b);
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  const double total = static_cast<double>(std::accumulate(b.N.begin(), b.N.end(), std::uint64_t{0}));
  const double log_total = std::log1p(total);
  std::vector<double> scores(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double z = sd < 1e-12 ? 0.0 : (v[i] - mean) / sd;
    scores[i] = z + c * std::sqrt(log_total / (1.0 + static_cast<double>(b.N[i])));
  }
  return scores;
}

/// The d tiles a bandit nominates. Argmax mode takes the top-d scores with ties
/// broken uniformly at random; random mode draws d distinct tiles one at a time
/// from softmax(scores) over the tiles not yet taken.
template <class Generator>
std::vector<int> bandit_select_tiles(const Bandit& b, double c, Generator& rng) {
  const int tiles = b.num_tiles();
  if (b.d > tiles) throw InvalidArgument("bandit: d exceeds the number of tiles");
  const auto scores = bandit_scores(b, c);
  std::vector<int> order(static_cast<std::size_t>(tiles));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(b.d));
  if (b.mode == BanditMode::argmax) {
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return scores[x] > scores[y]; });
    chosen.assign(order.begin(), order.begin() + b.d);
    return chosen;
  }
  std::vector<double> weights(static_cast<std::size_t>(tiles));
  for (int pick = 0; pick < b.d; ++pick) {
    double top = -std::numeric_limits<double>::infinity();
    for (int i : order) top = std::max(top, scores[static_cast<std::size_t>(i)]);
    weights.resize(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) weights[k] = std::exp(scores[order[k]] - top);
    const std::size_t k = sample_index(weights, rng);
    chosen.push_back(order[k]);
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return chosen;
}

template <class Generator>
std::vector<double> bandit_sample_candidates(const Bandit& b, double c, Generator& rng) {
  const auto tiles = bandit_select_tiles(b, c, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> xs;
  xs.reserve(tiles.size());
  for (int i : tiles) xs.push_back(b.l + (static_cast<double>(i) + unit(rng)) * b.acc);
  return xs;
}

struct BanditDomain {
  double l = 0.0;
  double r = std::log(51.0);
  int tiles = 64;

  double acc() const { return (r - l) / tiles; }
};

struct EnsembleConfig {
  int members = 7;
  int d = 7;
  double ucb_scale = 1.0;
  BanditDomain domain;
  std::vector<double> lr_choices = {0.05, 0.1, 0.2};
  std::vector<int> width_choices = {1, 2, 3};
  std::optional<BanditMode> mode;  ///< unset: each member draws its own mode
};

struct BanditEnsemble {
  std::vector<Bandit> members;
  double ucb_scale = 1.0;
};

template <class Generator>
BanditEnsemble ensemble_init(const EnsembleConfig& cfg, Generator& rng) {
  if (cfg.members < 1) throw InvalidArgument("ensemble: need at least one member");
  if (cfg.d < 1) throw InvalidArgument("ensemble: d must be >= 1");
  if (cfg.lr_choices.empty() || cfg.width_choices.empty()) throw InvalidArgument("ensemble: empty choice set");
  if (!(cfg.ucb_scale >= 0.0)) throw InvalidArgument("ensemble: ucb_scale must be non-negative");
  BanditEnsemble e;
  e.ucb_scale = cfg.ucb_scale;
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> pick_lr(0, cfg.lr_choices.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_width(0, cfg.width_choices.size() - 1);
  for (int m = 0; m < cfg.members; ++m) {
    const BanditMode mode = coin(rng) == 0 ? BanditMode::argmax : BanditMode::random;
    const double lr = cfg.lr_choices[pick_lr(rng)];
    const int width = cfg.width_choices[pick_width(rng)];
    e.members.push_back(make_bandit(cfg.mode.value_or(mode), cfg.domain.l, cfg.domain.r, cfg.domain.acc(), width,
                                    lr, cfg.d));
  }
  return e;
}

/// Smallest x the ensemble hands out: the image of the largest temperature.
inline double ensemble_x_min() { return tau_to_x(kTauMax); }

inline double candidate_to_tau(double x, double r) {
  const double clamped = std::clamp(x, ensemble_x_min(), r);
  return std::clamp(x_to_tau(clamped), kTauMin, kTauMax);
}

/// Pools every member's nominations and returns the temperature of one drawn uniformly.
template <class Generator>
double ensemble_propose(const BanditEnsemble& e, Generator& rng) {
  if (e.members.empty()) throw InvalidArgument("ensemble: not initialized");
  std::vector<double> pool;
  for (const auto& b : e.members) {
    const auto xs = bandit_sample_candidates(b, e.ucb_scale, rng);
    pool.insert(pool.end(), xs.begin(), xs.end());
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return candidate_to_tau(pool[pick(rng)], e.members.front().r);
}

inline void ensemble_update(BanditEnsemble& e, double tau, double g) {
  if (!(tau > 0.0)) throw InvalidArgument("ensemble_update: tau must be positive");
  const double x = tau_to_x(tau);
  for (auto& b : e.members) bandit_update(b, x, g);
}

/// Member-averaged tile values.
inline std::vector<double> ensemble_values(const BanditEnsemble& e) {
  if (e.members.empty()) return {};
  std::vector<double> avg(e.members.front().w.size(), 0.0);
  for (const auto& b : e.members) {
    const auto v = bandit_eval(b);
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += v[i];
  }
  for (double& x : avg) x /= static_cast<double>(e.members.size());
  return avg;
}

/// Temperature at the centre of the tile with the highest member-averaged value.
inline double ensemble_best_tau(const BanditEnsemble& e) {
  const auto v = ensemble_values(e);
  if (v.empty()) throw InvalidArgument("ensemble: not initialized");
  const auto best = static_cast<double>(std::max_element(v.begin(), v.end()) - v.begin());
  const auto& b = e.members.front();
  return candidate_to_tau(b.l + (best + 0.5) * b.acc, b.r);
}

// Text snapshot:
//   bandit-ensemble 1
//   ucb_scale <c>
//   members <M>
//   then per member:
//     member <mode> <l> <r> <acc> <width> <lr> <d> <T>
//     w <T reals>
//     N <T integers>
inline void write_ensemble(std::ostream& out, const BanditEnsemble& e) {
  const auto old = out.precision(17);
  out << "bandit-ensemble 1\nucb_scale " << e.ucb_scale << "\nmembers " << e.members.size() << "\n";
  for (const auto& b : e.members) {
    out << "member " << to_string(b.mode) << ' ' << b.l << ' ' << b.r << ' ' << b.acc << ' ' << b.width << ' '
        << b.lr << ' ' << b.d << ' ' << b.num_tiles() << "\nw";
    for (double x : b.w) out << ' ' << x;
    out << "\nN";
    for (auto n : b.N) out << ' ' << n;
    out << "\n";
  }
  out.precision(old);
}

inline BanditEnsemble read_ensemble(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw ParseError("ensemble snapshot: expected '" + word + "'");
  };
  expect("bandit-ensemble");
  int version = 0;
  if (!(in >> version) || version != 1) throw ParseError("ensemble snapshot: unsupported version");
  BanditEnsemble e;
  std::size_t count = 0;
  expect("ucb_scale");
  if (!(in >> e.ucb_scale)) throw ParseError("ensemble snapshot: bad ucb_scale");
  expect("members");
  if (!(in >> count)) throw ParseError("ensemble snapshot: bad member count");
  for (std::size_t m = 0; m < count; ++m) {
    expect("member");
    std::string mode;
    double l = 0, r = 0, acc = 0, lr = 0;
    int width = 0, d = 0, tiles = 0;
    if (!(in >> mode >> l >> r >> acc >> width >> lr >> d >> tiles)) {
      throw ParseError("ensemble snapshot: bad member header");
    }
    Bandit b = make_bandit(bandit_mode_from_string(mode), l, r, acc, width, lr, d);
    if (b.num_tiles() != tiles) throw ParseError("ensemble snapshot: tile count disagrees with domain");
    expect("w");
    for (auto& x : b.w) {
      if (!(in >> x)) throw ParseError("ensemble snapshot: bad weight");
    }
    expect("N");
    for (auto& n : b.N) {
      if (!(in >> n)) throw ParseError("ensemble snapshot: bad count");
    }
    e.members.push_back(std::move(b));
  }
  return e;
}

}  // namespace dice
