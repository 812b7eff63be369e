#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "dice/bandit.hpp"

using namespace dice;

namespace {

Bandit five_tiles(int width, double lr = 0.1) {
  Bandit b = make_bandit(BanditMode::argmax, 0.0, 5.0, 1.0, width, lr, 1);
  b.w = {1, 2, 3, 4, 5};
  return b;
}

}  // namespace

TEST(Bandit, TileIndexClipsToRange) {
  const Bandit b = make_bandit(BanditMode::argmax, 0.0, 8.0, 1.0, 0, 0.1, 1);
  EXPECT_EQ(b.num_tiles(), 8);
  EXPECT_EQ(tile_index(b, -3.0), 0);
  EXPECT_EQ(tile_index(b, 0.0), 0);
  EXPECT_EQ(tile_index(b, 2.5), 2);
  EXPECT_EQ(tile_index(b, 8.0), 7);
  EXPECT_EQ(tile_index(b, 100.0), 7);
}

TEST(Bandit, DefaultDomainHasSixtyFourTiles) {
  const BanditDomain dom;
  EXPECT_EQ(tile_count(dom.l, dom.r, dom.acc()), 64);
}

TEST(Bandit, ConstructionErrors) {
  EXPECT_THROW(make_bandit(BanditMode::argmax, 1.0, 0.0, 0.1, 0, 0.1, 1), InvalidArgument);
  EXPECT_THROW(make_bandit(BanditMode::argmax, 0.0, 1.0, 0.0, 0, 0.1, 1), InvalidArgument);
  EXPECT_THROW(make_bandit(BanditMode::argmax, 0.0, 1.0, 0.25, -1, 0.1, 1), InvalidArgument);
  EXPECT_THROW(make_bandit(BanditMode::argmax, 0.0, 1.0, 0.25, 0, 0.1, 5), InvalidArgument);
  EXPECT_THROW(make_bandit(BanditMode::argmax, 0.0, 1.0, 0.25, 0, 0.0, 1), InvalidArgument);
  EXPECT_THROW(bandit_mode_from_string("greedy"), InvalidArgument);
}

TEST(Bandit, WindowedEvaluation) {
  const auto v = bandit_eval(five_tiles(1));
  EXPECT_DOUBLE_EQ(v[2], 3.0);
  EXPECT_DOUBLE_EQ(v[0], 1.5);
  EXPECT_DOUBLE_EQ(v[4], 4.5);
  const Bandit flat = five_tiles(0);
  EXPECT_EQ(bandit_eval(flat), flat.w);
}

TEST(Bandit, UpdateUsesValueBeforeMutation) {
  Bandit b = five_tiles(1);
  bandit_update(b, 2.5, 10.0);
  const std::vector<double> expect{1, 2.7, 3.7, 4.7, 5};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(b.w[i], expect[i], 1e-12);
  EXPECT_EQ(b.N[2], 1u);
  EXPECT_EQ(std::accumulate(b.N.begin(), b.N.end(), std::uint64_t{0}), 1u);
  EXPECT_THROW(bandit_update(b, 2.5, std::nan("")), InvalidArgument);
}

TEST(Bandit, ConstantReturnConverges) {
  Bandit b = five_tiles(2, 0.2);
  for (int k = 0; k < 500; ++k) bandit_update(b, 1.5, -4.0);
  EXPECT_NEAR(bandit_eval_at(b, 1), -4.0, 1e-9);
  EXPECT_EQ(b.N[1], 500u);
}

TEST(Bandit, Scores) {
  Bandit b = make_bandit(BanditMode::argmax, 0.0, 2.0, 1.0, 0, 0.1, 1);
  b.w = {1, 0};
  b.N = {1, 0};
  auto s = bandit_scores(b, 1.0);
  EXPECT_NEAR(s[0], 1.5887, 1e-4);
  EXPECT_NEAR(s[1], -0.1674, 1e-4);
  s = bandit_scores(b, 0.0);
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(s[1], -1.0);
  const Bandit fresh = make_bandit(BanditMode::argmax, 0.0, 2.0, 1.0, 0, 0.1, 1);
  for (double x : bandit_scores(fresh, 1.0)) EXPECT_EQ(x, 0.0);
}

TEST(Bandit, ScoresInvariantToAffineValueChange) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> noise(0.0, 1.0);
  Bandit b = make_bandit(BanditMode::argmax, 0.0, 10.0, 1.0, 1, 0.1, 3);
  for (auto& w : b.w) w = noise(rng);
  for (auto& n : b.N) n = static_cast<std::uint64_t>(rng() % 7);
  Bandit moved = b;
  for (auto& w : moved.w) w = 3.5 * w - 12.0;
  const auto s1 = bandit_scores(b, 1.0);
  const auto s2 = bandit_scores(moved, 1.0);
  for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_NEAR(s1[i], s2[i], 1e-9);
  std::mt19937_64 r1(5), r2(5);
  auto t1 = bandit_select_tiles(b, 1.0, r1);
  auto t2 = bandit_select_tiles(moved, 1.0, r2);
  EXPECT_EQ(std::set<int>(t1.begin(), t1.end()), std::set<int>(t2.begin(), t2.end()));
}

TEST(Bandit, ArgmaxPicksTopScores) {
  Bandit b = make_bandit(BanditMode::argmax, 0.0, 3.0, 1.0, 0, 0.1, 2);
  b.w = {2, 0, 1};
  std::mt19937_64 rng(52);
  for (int k = 0; k < 20; ++k) {
    const auto tiles = bandit_select_tiles(b, 1.0, rng);
    EXPECT_EQ(std::set<int>(tiles.begin(), tiles.end()), (std::set<int>{0, 2}));
  }
}

TEST(Bandit, FullDepthCoversEveryTileOnce) {
  std::mt19937_64 rng(53);
  for (BanditMode mode : {BanditMode::argmax, BanditMode::random}) {
    Bandit b = make_bandit(mode, 0.0, 6.0, 1.0, 1, 0.1, 6);
    b.w = {0.3, -1, 2, 0, 5, 1};
    const auto xs = bandit_sample_candidates(b, 1.0, rng);
    ASSERT_EQ(xs.size(), 6u);
    std::multiset<int> tiles;
    for (double x : xs) tiles.insert(static_cast<int>(std::floor(x)));
    EXPECT_EQ(tiles, (std::multiset<int>{0, 1, 2, 3, 4, 5}));
  }
}

TEST(Bandit, RandomModeFavorsDominantTile) {
  Bandit b = make_bandit(BanditMode::random, 0.0, 3.0, 1.0, 0, 0.1, 1);
  b.N = {0, 1000000, 1000000};
  // The exploration bonus gives tile 0 a score lead of about 76.
  const auto s = bandit_scores(b, 20.0);
  ASSERT_GT(s[0] - std::max(s[1], s[2]), std::log(2e9));
  std::mt19937_64 rng(54);
  for (int k = 0; k < 10000; ++k) EXPECT_EQ(bandit_select_tiles(b, 20.0, rng).front(), 0);
}

TEST(Bandit, CandidatesStayInsideChosenTile) {
  Bandit b = make_bandit(BanditMode::random, 0.0, 2.0, 0.25, 1, 0.1, 3);
  std::mt19937_64 rng(55);
  for (int k = 0; k < 1000; ++k) {
    for (double x : bandit_sample_candidates(b, 1.0, rng)) {
      EXPECT_GE(x, 0.0);
      EXPECT_LT(x, 2.0);
    }
  }
}

TEST(Ensemble, InitIsReproducibleAndSharesDomain) {
  EnsembleConfig cfg;
  std::mt19937_64 r1(60), r2(60);
  const auto a = ensemble_init(cfg, r1);
  const auto b = ensemble_init(cfg, r2);
  ASSERT_EQ(a.members.size(), 7u);
  for (std::size_t m = 0; m < 7; ++m) {
    EXPECT_EQ(a.members[m].mode, b.members[m].mode);
    EXPECT_EQ(a.members[m].lr, b.members[m].lr);
    EXPECT_EQ(a.members[m].width, b.members[m].width);
    EXPECT_EQ(a.members[m].num_tiles(), 64);
    EXPECT_EQ(a.members[m].d, 7);
    EXPECT_EQ(a.members[m].r, a.members[0].r);
  }
  cfg.members = 0;
  EXPECT_THROW(ensemble_init(cfg, r1), InvalidArgument);
}

TEST(Ensemble, SingleMemberForcedArgmax) {
  EnsembleConfig cfg;
  cfg.members = 1;
  cfg.d = 1;
  cfg.mode = BanditMode::argmax;
  std::mt19937_64 rng(61);
  const auto e = ensemble_init(cfg, rng);
  ASSERT_EQ(e.members.size(), 1u);
  EXPECT_EQ(e.members[0].mode, BanditMode::argmax);
  std::mt19937_64 r1(7), r2(7);
  EXPECT_EQ(ensemble_propose(e, r1), ensemble_propose(e, r2));
}

TEST(Ensemble, TransformAndRange) {
  EXPECT_NEAR(candidate_to_tau(std::log(2.0), std::log(51.0)), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(candidate_to_tau(0.0, std::log(51.0)), kTauMax);
  EXPECT_NEAR(candidate_to_tau(std::log(51.0), std::log(51.0)), 0.02, 1e-12);
  std::mt19937_64 rng(62);
  const auto e = ensemble_init(EnsembleConfig{}, rng);
  for (int k = 0; k < 2000; ++k) {
    const double tau = ensemble_propose(e, rng);
    EXPECT_GE(tau, kTauMin * (1 - 1e-12));
    EXPECT_LE(tau, kTauMax);
    EXPECT_TRUE(std::isfinite(tau));
  }
}

TEST(Ensemble, FreshProposalsCoverTheDomain) {
  std::mt19937_64 rng(63);
  const auto e = ensemble_init(EnsembleConfig{}, rng);
  const auto& b = e.members.front();
  std::set<int> seen;
  for (int k = 0; k < 10000; ++k) seen.insert(tile_index(b, tau_to_x(ensemble_propose(e, rng))));
  EXPECT_GE(static_cast<double>(seen.size()), 0.95 * b.num_tiles());
}

TEST(Ensemble, UpdateTouchesEveryMemberOnce) {
  std::mt19937_64 rng(64);
  auto e = ensemble_init(EnsembleConfig{}, rng);
  ensemble_update(e, 1.0, 3.0);
  for (const auto& b : e.members) {
    EXPECT_EQ(std::accumulate(b.N.begin(), b.N.end(), std::uint64_t{0}), 1u);
    EXPECT_EQ(b.N[tile_index(b, std::log(2.0))], 1u);
  }
  for (int k = 0; k < 2000; ++k) ensemble_update(e, 1.0, 3.0);
  for (const auto& b : e.members) EXPECT_NEAR(bandit_eval_at(b, tile_index(b, std::log(2.0))), 3.0, 1e-6);
  EXPECT_THROW(ensemble_update(e, 0.0, 1.0), InvalidArgument);
}

TEST(Ensemble, ConcentratesNearPeakOfSyntheticTarget) {
  std::mt19937_64 rng(65);
  auto e = ensemble_init(EnsembleConfig{}, rng);
  const auto& b = e.members.front();
  const double x_star = 2.0;
  std::normal_distribution<double> noise(0.0, 0.05);
  int near = 0;
  const int rounds = 5000;
  for (int k = 0; k < rounds; ++k) {
    const double tau = ensemble_propose(e, rng);
    const double x = tau_to_x(tau);
    if (std::abs(x - x_star) <= 2.0 * b.acc) ++near;
    ensemble_update(e, tau, -(x - x_star) * (x - x_star) + noise(rng));
  }
  const double share = near / static_cast<double>(rounds);
  RecordProperty("near_share", std::to_string(share));
  EXPECT_GE(share, 0.6);
  EXPECT_NEAR(tau_to_x(ensemble_best_tau(e)), x_star, 2.0 * b.acc);
}

TEST(Ensemble, ProposalsFavorPeakOverUniform) {
  std::mt19937_64 rng(68);
  auto e = ensemble_init(EnsembleConfig{}, rng);
  const auto& b = e.members.front();
  const double x_star = 2.0;
  int near = 0;
  const int rounds = 5000;
  for (int k = 0; k < rounds; ++k) {
    const double tau = ensemble_propose(e, rng);
    const double x = tau_to_x(tau);
    if (std::abs(x - x_star) <= 2.0 * b.acc) ++near;
    ensemble_update(e, tau, -(x - x_star) * (x - x_star));
  }
  const double uniform_share = 4.0 * b.acc / (b.r - b.l);
  EXPECT_GE(near / static_cast<double>(rounds), 2.0 * uniform_share);
}

TEST(Ensemble, DeterministicTraces) {
  auto run = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto e = ensemble_init(EnsembleConfig{}, rng);
    std::vector<double> taus;
    for (int k = 0; k < 200; ++k) {
      taus.push_back(ensemble_propose(e, rng));
      ensemble_update(e, taus.back(), std::sin(static_cast<double>(k)));
    }
    return taus;
  };
  EXPECT_EQ(run(66), run(66));
  EXPECT_NE(run(66), run(67));
}

TEST(Ensemble, SnapshotRoundTrip) {
  std::mt19937_64 rng(67);
  auto e = ensemble_init(EnsembleConfig{}, rng);
  for (int k = 0; k < 50; ++k) ensemble_update(e, ensemble_propose(e, rng), 0.1 * k);
  std::stringstream buf;
  write_ensemble(buf, e);
  const auto back = read_ensemble(buf);
  ASSERT_EQ(back.members.size(), e.members.size());
  EXPECT_EQ(back.ucb_scale, e.ucb_scale);
  for (std::size_t m = 0; m < e.members.size(); ++m) {
    EXPECT_EQ(back.members[m].w, e.members[m].w);
    EXPECT_EQ(back.members[m].N, e.members[m].N);
    EXPECT_EQ(back.members[m].mode, e.members[m].mode);
    EXPECT_EQ(back.members[m].width, e.members[m].width);
    EXPECT_EQ(back.members[m].lr, e.members[m].lr);
  }
  std::istringstream bad("bandit-ensemble 2\n");
  EXPECT_THROW(read_ensemble(bad), ParseError);
}
