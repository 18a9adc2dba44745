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
#include <vector>

#include <gtest/gtest.h>

#include "beliefplay/belief.h"
#include "beliefplay/games.h"
#include "beliefplay/random.h"

namespace beliefplay {
namespace {

Belief B(std::initializer_list<double> p) {
  return Belief::FromProbabilities(std::vector<double>(p));
}

PayoffObservation Price(double p) { return PayoffObservation{{p}, {}}; }

TEST(BayesUpdate, EquivalencePointLeavesBeliefUnchanged) {
  const CournotGame game;
  const auto q = StrategyProfile::Scalars({0.5, 0.5});
  const Belief prior = B({0.3, 0.7});
  for (double price : {-3.0, 0.2, 1.0, 4.5}) {
    const Belief post = BayesUpdate(prior, game, q, Price(price));
    EXPECT_NEAR(post.prob(0), 0.3, 1e-14);
    EXPECT_NEAR(post.prob(1), 0.7, 1e-14);
  }
}

TEST(BayesUpdate, HandComputedPosterior) {
  // Total 0.5: means 1.5 and 2.5, variance 0.5, observed price 1.5. The
  // likelihood ratio s1:s2 is exp(((1.5 - 2.5)^2 - 0) / (2 * 0.5)) = e.
  const CournotGame game;
  const Belief post = BayesUpdate(B({0.5, 0.5}), game,
                                  StrategyProfile::Scalars({0.25, 0.25}), Price(1.5));
  EXPECT_NEAR(post.prob(0), std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-14);
}

TEST(BayesUpdate, PointMassIsAbsorbing) {
  const CournotGame game;
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto q = game.space().Sample(rng);
    const Belief post = BayesUpdate(B({1.0, 0.0}), game, q, game.SampleObservation(q, rng));
    EXPECT_EQ(post.prob(0), 1.0);
    EXPECT_EQ(post.prob(1), 0.0);
  }
}

TEST(BayesUpdate, SequentialEqualsBatch) {
  const PublicGoodGame game;
  Rng rng(4);
  Belief seq = Belief::Uniform(3);
  LikelihoodHistory history(3);
  for (int k = 0; k < 30; ++k) {
    const auto q = game.space().Sample(rng);
    const auto obs = game.SampleObservation(q, rng);
    seq = BayesUpdate(seq, game, q, obs);
    history.Accumulate(game, q, obs);
  }
  const Belief batch = BayesUpdateFromLogLikelihoods(Belief::Uniform(3),
                                                     history.log_likelihood());
  EXPECT_EQ(history.steps(), 30u);
  for (std::size_t s = 0; s < 3; ++s) EXPECT_NEAR(seq.prob(s), batch.prob(s), 1e-12);
}

TEST(BayesUpdate, RejectsMismatchedSizes) {
  const CournotGame game;
  EXPECT_THROW(BayesUpdate(Belief::Uniform(3), game, StrategyProfile::Scalars({0.1, 0.1}),
                           Price(1.0)),
               BeliefplayError);
}

TEST(ConditionalRatio, MartingaleAtCournotExample) {
  const CournotGame game;
  const auto est = ConditionalRatioExpectation(
      game, B({0.5, 0.5}), StrategyProfile::Scalars({0.25, 0.25}), 1, 100000, 9);
  EXPECT_GT(est.std_error, 0.0);
  EXPECT_NEAR(est.mean, 1.0, 3.0 * est.std_error);
}

TEST(ConditionalRatio, TrueParameterIsExactlyOne) {
  const CournotGame game;
  const auto est = ConditionalRatioExpectation(
      game, B({0.5, 0.5}), StrategyProfile::Scalars({0.25, 0.25}), 0, 1000, 9);
  EXPECT_EQ(est.mean, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(ConditionalRatio, EquivalencePointIsExactlyOne) {
  const CournotGame game;
  const auto est = ConditionalRatioExpectation(
      game, B({0.5, 0.5}), StrategyProfile::Scalars({0.5, 0.5}), 1, 1000, 9);
  EXPECT_EQ(est.mean, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(ConditionalRatio, UnequalVariancesStayInsideThreeSigma) {
  const PublicGoodGame game;
  const Belief theta = B({0.2, 0.5, 0.3});
  const auto q = StrategyProfile::Scalars({1.0, 0.5});
  for (std::size_t s : {0u, 2u}) {
    const auto est = ConditionalRatioExpectation(game, theta, q, s, 100000, 17 + s);
    EXPECT_NEAR(est.mean, theta.prob(s) / theta.prob(1), 3.0 * est.std_error);
  }
}

TEST(TrueLogBeliefDrift, NonnegativeAndZeroAtEquivalence) {
  const CournotGame game;
  const auto zero = TrueLogBeliefDrift(game, B({0.4, 0.6}),
                                       StrategyProfile::Scalars({0.5, 0.5}), 1000, 1);
  EXPECT_NEAR(zero.mean, 0.0, 1e-15);
  const auto pos = TrueLogBeliefDrift(game, B({0.4, 0.6}),
                                      StrategyProfile::Scalars({2.0 / 3.0, 2.0 / 3.0}),
                                      100000, 1);
  EXPECT_GT(pos.mean, -3.0 * pos.std_error);
  // Bounded above by -log theta(s*).
  EXPECT_LT(pos.mean, -std::log(0.4) + 3.0 * pos.std_error);
}

TEST(MapGrid, PointsAndLookup) {
  const MapGrid grid{{0.0, 1.0}, {1.0, 2.0}, {3, 5}};
  EXPECT_EQ(grid.size(), 15u);
  EXPECT_EQ(grid.Point(0), (std::vector<double>{0.0, 1.0}));
  // Last axis fastest.
  EXPECT_EQ(grid.Point(1), (std::vector<double>{0.0, 1.25}));
  EXPECT_EQ(grid.Point(14), (std::vector<double>{1.0, 2.0}));
  const std::vector<double> x = {0.5, 1.75};
  ASSERT_TRUE(grid.Find(x).has_value());
  EXPECT_EQ(grid.Point(*grid.Find(x)), x);
  const std::vector<double> y = {0.4, 1.75};
  EXPECT_FALSE(grid.Find(y).has_value());
  const std::vector<double> steps = {0.01, 0.5};
  const MapGrid fine = MapGrid::WithSteps({0.0, 0.0}, {5.0, 1.0}, steps);
  EXPECT_EQ(fine.points, (std::vector<std::size_t>{501, 3}));
}

TEST(MapEstimate, SinglePointGrid) {
  const MapGrid grid{{2.0}, {2.0}, {1}};
  LikelihoodHistory history(1);
  EXPECT_EQ(MapEstimateOnGrid(history, {}, grid).point, std::vector<double>{2.0});
}

TEST(MapEstimate, UniformPriorIsTheMle) {
  const MapGrid grid{{0.0}, {1.0}, {5}};
  LikelihoodHistory history(5);
  const std::vector<double> ll = {-3.0, -1.0, -0.5, -2.0, -9.0};
  // Feed the log-likelihoods through a one-point game-free path.
  struct Fixed : public GameModel {
    std::vector<double> ll;
    StrategySpace sp = StrategySpace::Intervals({{0.0, 1.0}});
    ParameterSet ps{{"a", "b", "c", "d", "e"}, 0};
    std::string id() const override { return "fixed"; }
    const StrategySpace& space() const override { return sp; }
    const ParameterSet& params() const override { return ps; }
    Capabilities capabilities() const override { return {}; }
    std::vector<double> MeanPayoff(std::size_t, const StrategyProfile&) const override {
      return {0.0};
    }
    std::size_t observation_dim() const override { return 1; }
    void ObservationMoments(std::size_t, const StrategyProfile&, std::span<const int>,
                            std::span<double> m, std::span<double> v) const override {
      m[0] = 0.0;
      v[0] = 1.0;
    }
    void LogLikelihoods(const StrategyProfile&, const PayoffObservation&,
                        std::span<double> out) const override {
      std::copy(ll.begin(), ll.end(), out.begin());
    }
  } game;
  game.ll = ll;
  history.Accumulate(game, StrategyProfile::Scalars({0.5}), Price(0.0));
  EXPECT_EQ(MapEstimateOnGrid(history, {}, grid).index, 2u);
  // A prior strong enough to move the argmax.
  const std::vector<double> prior = {0.0, 0.0, 0.0, 5.0, 0.0};
  EXPECT_EQ(MapEstimateOnGrid(history, prior, grid).index, 3u);
}

TEST(MapEstimate, AffineNoiselessRecovery) {
  const std::vector<double> steps = {0.01, 0.01};
  const MapGrid grid = MapGrid::WithSteps({0.0, 0.0}, {5.0, 5.0}, steps);
  const std::vector<double> truth = {2.0, 1.0};
  const AffineGaussianGame game = AffineGaussianGame::OnGrid(grid, truth, {{0.0, 4.0}}, 1.0);
  LikelihoodHistory history(grid.size());
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const double q = 4.0 * Uniform01(rng);
    history.Accumulate(game, StrategyProfile::Scalars({q}),
                       PayoffObservation{{2.0 * q + 1.0}, {}});
  }
  const auto est = MapEstimateOnGrid(history, {}, grid);
  EXPECT_LE(std::abs(est.point[0] - 2.0), 0.01 + 1e-9);
  EXPECT_LE(std::abs(est.point[1] - 1.0), 0.01 + 1e-9);
}

TEST(Ols, TwoPointsByHand) {
  OlsState state(2);
  const std::vector<double> q1 = {1.0}, q2 = {2.0};
  OlsUpdate(state, q1, 3.0);
  EXPECT_FALSE(state.Estimate().has_value());
  OlsUpdate(state, q2, 5.0);
  const auto est = state.Estimate();
  ASSERT_TRUE(est.has_value());
  EXPECT_NEAR((*est)[0], 2.0, 1e-12);
  EXPECT_NEAR((*est)[1], 1.0, 1e-12);
  EXPECT_EQ(state.count(), 2u);
}

TEST(Ols, NoiselessAffineInterpolation) {
  OlsState state(3);
  const double b0 = -0.7, b1 = 1.9, b2 = 0.35;
  for (const auto& q : {std::vector<double>{0.1, 0.2}, std::vector<double>{1.5, -0.3},
                        std::vector<double>{-0.8, 2.0}}) {
    OlsUpdate(state, q, b0 * q[0] + b1 * q[1] + b2);
  }
  const auto est = state.Estimate();
  ASSERT_TRUE(est.has_value());
  EXPECT_NEAR((*est)[0], b0, 1e-9);
  EXPECT_NEAR((*est)[1], b1, 1e-9);
  EXPECT_NEAR((*est)[2], b2, 1e-9);
}

TEST(Ols, RepeatedProfileIsRankDeficient) {
  OlsState state(2);
  const std::vector<double> q = {0.5};
  for (int k = 0; k < 10; ++k) OlsUpdate(state, q, 1.0);
  EXPECT_FALSE(state.Estimate().has_value());
}

}  // namespace
}  // namespace beliefplay
