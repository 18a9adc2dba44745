// Copyright 2026 The beliefplay Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "beliefplay/games.h"
#include "beliefplay/model.h"
#include "beliefplay/random.h"

namespace beliefplay {
namespace {

std::vector<std::unique_ptr<GameModel>> AllGames() {
  std::vector<std::unique_ptr<GameModel>> games;
  games.push_back(std::make_unique<CournotGame>());
  games.push_back(std::make_unique<CoordinationSafeMarginGame>());
  games.push_back(std::make_unique<CoordinationIncreasingPenaltyGame>());
  games.push_back(std::make_unique<PublicGoodGame>());
  games.push_back(std::make_unique<FiniteMatrixGame>());
  return games;
}

std::vector<double> Mean(const GameModel& game, std::size_t s,
                         const StrategyProfile& q,
                         std::vector<int> actions = {}) {
  std::vector<double> mean(game.observation_dim()), var(game.observation_dim());
  game.ObservationMoments(s, q, actions, mean, var);
  return mean;
}

Belief B(std::initializer_list<double> p) {
  return Belief::FromProbabilities(std::vector<double>(p));
}

TEST(Cournot, PriceMeansMeetAtTheEquivalencePoint) {
  const CournotGame game;
  const auto q = StrategyProfile::Scalars({0.5, 0.5});
  EXPECT_DOUBLE_EQ(Mean(game, 0, q)[0], 1.0);
  EXPECT_DOUBLE_EQ(Mean(game, 1, q)[0], 1.0);
  const auto payoff = game.MeanPayoff(0, StrategyProfile::Scalars({0.25, 0.5}));
  // q_i * (2 - 0.75)
  EXPECT_DOUBLE_EQ(payoff[0], 0.25 * 1.25);
  EXPECT_DOUBLE_EQ(payoff[1], 0.5 * 1.25);
}

TEST(Cournot, EquilibriumMap) {
  const CournotGame game;
  const auto star = game.EquilibriumMap(B({1.0, 0.0}));
  EXPECT_NEAR(star.scalar(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(star.scalar(1), 2.0 / 3.0, 1e-15);
  const auto bar = game.EquilibriumMap(B({0.5, 0.5}));
  EXPECT_NEAR(bar.scalar(0), 0.5, 1e-15);
  EXPECT_NEAR(bar.scalar(1), 0.5, 1e-15);
}

TEST(Cournot, BestResponse) {
  const CournotGame game;
  const auto q = StrategyProfile::Scalars({0.1, 2.0 / 3.0});
  const auto br = game.BestResponseMap(B({1.0, 0.0}), q, 0).Selection();
  EXPECT_NEAR(br[0], 2.0 / 3.0, 1e-15);
  // theta = (0.9, 0.1): alpha-bar 2.2, beta-bar 1.2.
  const auto br2 = game.BestResponseMap(B({0.9, 0.1}), q, 0).Selection();
  EXPECT_NEAR(br2[0], (2.2 - 1.2 * 2.0 / 3.0) / (2.0 * 1.2), 1e-14);
}

TEST(Cournot, Potential) {
  const CournotGame game;
  EXPECT_NEAR(game.Potential(0, StrategyProfile::Scalars({2.0 / 3.0, 2.0 / 3.0})),
              4.0 / 3.0, 1e-14);
}

TEST(Cournot, GridParameterSet) {
  MapGrid grid{{1.0, 0.5}, {3.0, 1.5}, {9, 9}};
  const std::vector<double> truth = {2.0, 1.0};
  const CournotGame game = CournotGame::OnGrid(grid, truth);
  EXPECT_EQ(game.params().size(), 81u);
  const std::size_t s = game.params().true_index();
  EXPECT_DOUBLE_EQ(game.alpha(s), 2.0);
  EXPECT_DOUBLE_EQ(game.beta(s), 1.0);
  const std::vector<double> off = {2.1, 1.0};
  EXPECT_THROW(CournotGame::OnGrid(grid, off), BeliefplayError);
}

// The three-branch closed form of the safe-margin equilibrium line for the
// default margins (0, 0.5, 1.5) and weight 2.
double SafeMarginOffsetOracle(double t1, double t2, double t3) {
  if (t2 + 3.0 * t3 > 2.5) return (t2 + 3.0 * t3) / 2.0 + 0.25;
  if (t1 < 0.5) return (2.0 * t2 + 1.0) / (4.0 * (t1 + t2));
  return 1.0 / (4.0 * t1);
}

TEST(SafeMargin, OffsetMatchesClosedForm) {
  const CoordinationSafeMarginGame game;
  EXPECT_DOUBLE_EQ(game.Offset(B({0.0, 0.0, 1.0})), 7.0 / 4.0);
  EXPECT_DOUBLE_EQ(game.Offset(B({1.0, 0.0, 0.0})), 1.0 / 4.0);
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    double a = -std::log(1.0 - Uniform01(rng)), b = -std::log(1.0 - Uniform01(rng)),
           c = -std::log(1.0 - Uniform01(rng));
    const double t = a + b + c;
    a /= t, b /= t, c /= t;
    EXPECT_NEAR(game.Offset(B({a, b, c})), SafeMarginOffsetOracle(a, b, c), 1e-12);
  }
}

TEST(SafeMargin, EquilibriumSelectionAndBestResponse) {
  const CoordinationSafeMarginGame game;
  const auto g = game.EquilibriumMap(B({0.0, 0.0, 1.0}));
  EXPECT_DOUBLE_EQ(g.scalar(0), 0.0);
  EXPECT_DOUBLE_EQ(g.scalar(1), 7.0 / 4.0);
  const auto br = game.BestResponseMap(B({0.0, 0.0, 1.0}),
                                       StrategyProfile::Scalars({1.0, 2.0}), 0);
  EXPECT_NEAR(br.Selection()[0], 0.25, 1e-15);
}

TEST(SafeMargin, Potential) {
  const CoordinationSafeMarginGame game;
  EXPECT_NEAR(game.Potential(2, StrategyProfile::Scalars({0.0, 7.0 / 4.0})), 1.625,
              1e-14);
}

TEST(IncreasingPenalty, EquilibriumLineAtHalf) {
  const CoordinationIncreasingPenaltyGame game;
  const auto offset = game.EquilibriumLineOffset(B({0.5, 0.5}));
  ASSERT_TRUE(offset.has_value());
  EXPECT_NEAR(*offset, 0.5, 1e-9);
  const auto g = game.EquilibriumMap(B({0.5, 0.5}));
  EXPECT_NEAR(g.scalar(1) - g.scalar(0), 0.5, 1e-9);
}

TEST(PublicGood, MeansEquilibriumAndBestResponse) {
  const PublicGoodGame game;
  const auto q = StrategyProfile::Scalars({1.0 / 3.0, 1.0 / 3.0});
  EXPECT_NEAR(Mean(game, 1, q)[0], 5.0 / 3.0, 1e-15);
  const auto g = game.EquilibriumMap(B({0.0, 1.0, 0.0}));
  EXPECT_NEAR(g.scalar(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.scalar(1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(game.BestResponseMap(B({0.0, 1.0, 0.0}), q, 1).Selection()[0], 1.0 / 3.0,
              1e-15);
}

// Best responses agree with a brute-force search of the expected payoff.
TEST(AllGames, BestResponseMaximizesExpectedPayoff) {
  Rng rng(21);
  for (const auto& game : AllGames()) {
    if (game->space().player(0).kind != StrategySpace::Kind::kBox) continue;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> p(game->params().size());
      double total = 0.0;
      for (double& x : p) total += (x = Uniform01(rng) + 0.01);
      for (double& x : p) x /= total;
      const Belief theta = Belief::FromProbabilities(p);
      StrategyProfile q = game->space().Sample(rng);
      for (std::size_t i = 0; i < game->num_players(); ++i) {
        const auto& box = game->space().player(i);
        double best = -1e300;
        for (int k = 0; k <= 4000; ++k) {
          StrategyProfile d = q;
          d.players[i][0] = box.lower[0] + (box.upper[0] - box.lower[0]) * k / 4000.0;
          best = std::max(best, game->ExpectedPayoff(theta, d, i));
        }
        StrategyProfile r = q;
        r.players[i] = game->BestResponseMap(theta, q, i).Selection();
        EXPECT_GE(game->ExpectedPayoff(theta, r, i), best - 1e-6) << game->id();
      }
    }
  }
}

TEST(AllGames, EquilibriumIsMutualBestResponse) {
  Rng rng(22);
  for (const auto& game : AllGames()) {
    if (!game->capabilities().has_equilibrium_map) continue;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> p(game->params().size());
      double total = 0.0;
      for (double& x : p) total += (x = Uniform01(rng));
      for (double& x : p) x /= total;
      const Belief theta = Belief::FromProbabilities(p);
      const StrategyProfile g = game->EquilibriumMap(theta);
      EXPECT_TRUE(game->space().Contains(g, 1e-12)) << game->id();
      for (std::size_t i = 0; i < game->num_players(); ++i) {
        EXPECT_LT(game->BestResponseMap(theta, g, i).Distance(g.players[i]), 1e-7)
            << game->id();
      }
    }
  }
}

// Psi(q_i', q_-i) - Psi(q) = u_i(q_i', q_-i) - u_i(q) for unilateral moves.
TEST(AllGames, PotentialDifferenceIdentity) {
  Rng rng(23);
  for (const auto& game : AllGames()) {
    if (!game->capabilities().has_potential) continue;
    for (int trial = 0; trial < 100; ++trial) {
      const StrategyProfile q = game->space().Sample(rng);
      const std::size_t i = trial % game->num_players();
      StrategyProfile d = q;
      d.players[i] = game->space().Sample(rng).players[i];
      for (std::size_t s = 0; s < game->params().size(); ++s) {
        const double dpsi = game->Potential(s, d) - game->Potential(s, q);
        const double du = game->MeanPayoff(s, d)[i] - game->MeanPayoff(s, q)[i];
        EXPECT_NEAR(dpsi, du, 1e-10) << game->id();
      }
    }
  }
}

TEST(AllGames, ChannelMeansAreContinuous) {
  Rng rng(24);
  constexpr double kH = 1e-6;
  for (const auto& game : AllGames()) {
    if (game->space().player(0).kind != StrategySpace::Kind::kBox) continue;
    for (int trial = 0; trial < 100; ++trial) {
      StrategyProfile q = game->space().Sample(rng);
      StrategyProfile qh = q;
      for (std::size_t i = 0; i < qh.num_players(); ++i) {
        const auto& box = game->space().player(i);
        qh.players[i][0] = std::min(qh.players[i][0] + kH, box.upper[0]);
      }
      for (std::size_t s = 0; s < game->params().size(); ++s) {
        const auto a = Mean(*game, s, q), b = Mean(*game, s, qh);
        for (std::size_t k = 0; k < a.size(); ++k) {
          EXPECT_LT(std::abs(b[k] - a[k]), 1e3 * kH) << game->id();
        }
      }
    }
  }
}

TEST(AllGames, SampledObservationsMatchChannelMoments) {
  for (const auto& game : AllGames()) {
    Rng rng(25);
    const StrategyProfile q = game->space().Sample(rng);
    if (!game->Branches(q).front().actions.empty()) continue;
    const std::size_t s = game->params().true_index();
    const auto mean = Mean(*game, s, q);
    std::vector<double> m(mean.size()), var(mean.size());
    game->ObservationMoments(s, q, {}, m, var);
    std::vector<double> sum(mean.size(), 0.0);
    constexpr int kN = 40000;
    for (int n = 0; n < kN; ++n) {
      const auto obs = game->SampleObservation(q, rng);
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += obs.values[k];
    }
    for (std::size_t k = 0; k < sum.size(); ++k) {
      EXPECT_NEAR(sum[k] / kN, mean[k], 5.0 * std::sqrt(var[k] / kN)) << game->id();
    }
  }
}

TEST(FiniteMatrix, MeansDifferOnlyAtTheDistinguishingProfile) {
  const FiniteMatrixGame game;
  StrategyProfile q;
  q.players = {{0.5, 0.5}, {0.5, 0.5}};
  for (int a0 = 0; a0 < 2; ++a0) {
    for (int a1 = 0; a1 < 2; ++a1) {
      const std::vector<int> actions = {a0, a1};
      for (std::size_t i = 0; i < 2; ++i) {
        const double diff = game.Mean(0, actions, i) - game.Mean(1, actions, i);
        if (a0 == 1 && a1 == 1) {
          EXPECT_NE(diff, 0.0);
        } else {
          EXPECT_EQ(diff, 0.0);
        }
      }
    }
  }
}

TEST(FiniteMatrix, SampleActionProfile) {
  Rng rng(31);
  StrategyProfile pure;
  pure.players = {{1.0, 0.0}, {1.0, 0.0}};
  for (int n = 0; n < 1000; ++n) {
    EXPECT_EQ(SampleActionProfile(pure, rng), (std::vector<int>{0, 0}));
  }
  StrategyProfile mixed;
  mixed.players = {{0.5, 0.5}, {0.5, 0.5}};
  constexpr int kN = 100000;
  int ones = 0;
  for (int n = 0; n < kN; ++n) ones += SampleActionProfile(mixed, rng)[0];
  EXPECT_NEAR(static_cast<double>(ones) / kN, 0.5, 0.005);
}

TEST(FiniteMatrix, BranchesFollowTheMixedProfile) {
  const FiniteMatrixGame game;
  StrategyProfile q;
  q.players = {{0.25, 0.75}, {0.6, 0.4}};
  double total = 0.0;
  for (const auto& b : game.Branches(q)) {
    const double want = q.players[0][b.actions[0]] * q.players[1][b.actions[1]];
    EXPECT_NEAR(b.weight, want, 1e-15);
    total += b.weight;
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(AffineGaussian, MeansAreAffine) {
  AffineGaussianGame::Options o;
  o.bounds = {{-2.0, 2.0}, {0.0, 1.0}};
  o.candidates = {{1.0, -0.5, 2.0, 0.0, 3.0, 1.0}};
  const AffineGaussianGame game(o);
  const auto q = StrategyProfile::Scalars({0.5, 0.25});
  const auto m = Mean(game, 0, q);
  EXPECT_NEAR(m[0], 1.0 * 0.5 - 0.5 * 0.25 + 2.0, 1e-15);
  EXPECT_NEAR(m[1], 0.0 * 0.5 + 3.0 * 0.25 + 1.0, 1e-15);
}

}  // namespace
}  // namespace beliefplay
