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

#include "beliefplay/dynamics.h"
#include "beliefplay/games.h"

namespace beliefplay {
namespace {

Belief B(std::initializer_list<double> p) {
  return Belief::FromProbabilities(std::vector<double>(p));
}

TEST(Schedule, NamedConstructors) {
  const auto c = StepsizeSchedule::Constant(0.3);
  EXPECT_EQ(c.Step(0, 1), 0.3);
  EXPECT_EQ(c.Step(1, 999), 0.3);
  const auto h = StepsizeSchedule::Harmonic();
  EXPECT_EQ(h.Step(0, 4), 0.25);
  const auto alt = StepsizeSchedule::Alternating();
  EXPECT_EQ(alt.Steps(2, 1), (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(alt.Steps(2, 2), (std::vector<double>{0.0, 1.0}));
  const auto ps = StepsizeSchedule::PhaseShiftedHarmonic();
  EXPECT_EQ(ps.Step(0, 5), 0.2);
  EXPECT_EQ(ps.Step(1, 5), 1.0 / 3.0);  // 1 / ceil(5 / 2)
  EXPECT_EQ(ps.Step(1, 6), 1.0 / 6.0);
  const auto ah = StepsizeSchedule::AlternatingHarmonic();
  EXPECT_EQ(ah.Steps(2, 3), (std::vector<double>{1.0 / 3.0, 1.0 / 6.0}));
  const auto g = StepsizeSchedule::Geometric(0.5);
  EXPECT_EQ(g.Step(0, 3), 0.125);
  const auto custom = StepsizeSchedule::Custom({{1.0, 0.5}, {0.0}});
  EXPECT_EQ(custom.Step(0, 1), 1.0);
  EXPECT_EQ(custom.Step(0, 7), 0.5);
  EXPECT_EQ(custom.Step(1, 3), 0.0);
}

TEST(ValidateSchedule, Harmonic) {
  const auto r = ValidateSchedule(StepsizeSchedule::Harmonic(), 2);
  EXPECT_TRUE(r.a2);
  EXPECT_TRUE(r.a4);
  EXPECT_TRUE(r.a3);
  EXPECT_DOUBLE_EQ(r.nu, 1.0);
}

TEST(ValidateSchedule, GeometricFailsA2) {
  const auto r = ValidateSchedule(StepsizeSchedule::Geometric(0.5), 1);
  EXPECT_FALSE(r.a2);
  // prod_{t>=1} (1 - 2^-t) ~ 0.288788.
  double oracle = 1.0;
  for (int t = 1; t < 60; ++t) oracle *= 1.0 - std::ldexp(1.0, -t);
  EXPECT_NEAR(r.tail_products.front(), oracle, 1e-12);
  EXPECT_NEAR(oracle, 0.288788, 1e-6);
}

TEST(ValidateSchedule, ConstantOne) {
  const auto r = ValidateSchedule(StepsizeSchedule::Constant(1.0), 2);
  EXPECT_TRUE(r.a2);
  EXPECT_EQ(r.tail_products.front(), 0.0);
  EXPECT_FALSE(r.a4);
  EXPECT_FALSE(r.a4_square_summable);
}

TEST(ValidateSchedule, AlternatingHasZeroNu) {
  const auto r = ValidateSchedule(StepsizeSchedule::Alternating(), 2);
  EXPECT_EQ(r.nu, 0.0);
  EXPECT_FALSE(r.a3);
  EXPECT_TRUE(r.a2);
}

TEST(ValidateSchedule, ShortHorizonRejected) {
  EXPECT_THROW(ValidateSchedule(StepsizeSchedule::Harmonic(), 2, 10), BeliefplayError);
}

TEST(Mode, ParseAndName) {
  for (const char* name : {"EQ", "BR", "MAP-EQ", "MAP-BR", "OLS-EQ", "OLS-BR"}) {
    EXPECT_EQ(ModeName(ParseMode(name)), name);
  }
  EXPECT_EQ(ParseMode("MAP-BR").estimator, Estimator::kMap);
  EXPECT_EQ(ParseMode("MAP-BR").rule, UpdateRule::kBestResponse);
  EXPECT_THROW(ParseMode("FP"), BeliefplayError);
}

TEST(DetectConvergence, ConstantWindow) {
  const std::vector<std::vector<double>> thetas(50, {0.3, 0.7}), qs(50, {1.0, 2.0});
  EXPECT_TRUE(DetectConvergence(thetas, qs, ConvergenceCriterion{}));
}

TEST(DetectConvergence, OscillationIsNotConvergence) {
  std::vector<std::vector<double>> thetas(50, {1.0}), qs;
  for (int k = 0; k < 50; ++k) qs.push_back({k % 2 ? 0.1 : 0.0});
  EXPECT_FALSE(DetectConvergence(thetas, qs, ConvergenceCriterion{}));
}

TEST(DetectConvergence, ShortHistoryIsNotConvergence) {
  const std::vector<std::vector<double>> thetas(10, {1.0}), qs(10, {1.0});
  EXPECT_FALSE(DetectConvergence(thetas, qs, ConvergenceCriterion{}));
}

TEST(ConvergenceTracker, HalvingDifferences) {
  // x_{k+1} = x_k + 2^-k: difference k is 2^-k, first <= 1e-6 at k = 20.
  ConvergenceCriterion c;
  c.window = 2;
  ConvergenceTracker tracker(c);
  double x = 0.0;
  EXPECT_FALSE(tracker.Add({1.0}, {x}));
  int first = -1;
  for (int k = 0; k < 30 && first < 0; ++k) {
    x += std::ldexp(1.0, -k);
    if (tracker.Add({1.0}, {x})) first = k;
  }
  EXPECT_EQ(first, 20);
}

TEST(ConvergenceTracker, AgreesWithWindowCheck) {
  ConvergenceCriterion c;
  c.window = 5;
  ConvergenceTracker tracker(c);
  std::vector<std::vector<double>> thetas, qs;
  const std::vector<double> path = {0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
  for (double v : path) {
    thetas.push_back({1.0});
    qs.push_back({v});
    const bool streaming = tracker.Add(thetas.back(), qs.back());
    const std::size_t w = std::min<std::size_t>(c.window, qs.size());
    const bool window = qs.size() >= c.window &&
                        DetectConvergence(std::span(thetas).last(w),
                                          std::span(qs).last(w), c);
    EXPECT_EQ(streaming, window) << "at " << qs.size();
  }
}

TEST(StepEq, ZeroAndFullSteps) {
  const CournotGame game;
  const auto q = StrategyProfile::Scalars({0.3, 1.2});
  const Belief theta = B({0.5, 0.5});
  const std::vector<double> zero = {0.0, 0.0}, one = {1.0, 1.0}, half = {0.5, 0.5};
  EXPECT_EQ(StepEq(game, theta, q, zero), q);
  EXPECT_EQ(StepEq(game, theta, q, one), game.EquilibriumMap(theta));
  const auto mid = StepEq(game, B({1.0, 0.0}), StrategyProfile::Scalars({0.0, 0.0}), half);
  EXPECT_NEAR(mid.scalar(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(mid.scalar(1), 1.0 / 3.0, 1e-15);
}

TEST(StepBr, Examples) {
  const PublicGoodGame pg;
  const auto fixed = StrategyProfile::Scalars({1.0 / 3.0, 1.0 / 3.0});
  for (double a : {0.1, 0.5, 1.0}) {
    const std::vector<double> steps = {a, a};
    const auto next = StepBr(pg, B({0.0, 1.0, 0.0}), fixed, steps);
    EXPECT_NEAR(next.scalar(0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(next.scalar(1), 1.0 / 3.0, 1e-15);
  }
  const CournotGame cournot;
  const std::vector<double> zero = {0.0, 0.0}, one = {1.0, 1.0};
  const auto q = StrategyProfile::Scalars({0.4, 0.9});
  EXPECT_EQ(StepBr(cournot, B({0.5, 0.5}), q, zero), q);
  const auto full = StepBr(cournot, B({1.0, 0.0}), StrategyProfile::Scalars({0.0, 0.0}), one);
  EXPECT_NEAR(full.scalar(0), 1.0, 1e-15);
  EXPECT_NEAR(full.scalar(1), 1.0, 1e-15);
}

DynamicsConfig CournotConfig(std::uint64_t seed) {
  DynamicsConfig c;
  c.theta1 = B({0.1, 0.9});
  c.q1 = StrategyProfile::Scalars({0.25, 0.25});
  c.schedule = StepsizeSchedule::Constant(1.0);
  c.max_steps = 2000;
  c.seed = seed;
  return c;
}

TEST(RunDynamics, ZeroStepsKeepsOnlyTheInitialState) {
  const CournotGame game;
  DynamicsConfig c = CournotConfig(1);
  c.max_steps = 0;
  const Trajectory traj = RunDynamics(game, c);
  ASSERT_EQ(traj.steps.size(), 1u);
  EXPECT_EQ(traj.steps[0].q, c.q1);
  EXPECT_FALSE(traj.steps[0].obs.has_value());
}

TEST(RunDynamics, IsDeterministic) {
  const CournotGame game;
  const Trajectory a = RunDynamics(game, CournotConfig(42));
  const Trajectory b = RunDynamics(game, CournotConfig(42));
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k].q, b.steps[k].q);
    EXPECT_EQ(a.steps[k].theta.log_probs(), b.steps[k].theta.log_probs());
    EXPECT_EQ(a.steps[k].obs, b.steps[k].obs);
  }
  EXPECT_EQ(a.converged_at, b.converged_at);
}

TEST(RunDynamics, CournotEndsAtOneOfTwoFixedPoints) {
  const CournotGame game;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Trajectory traj = RunDynamics(game, CournotConfig(seed));
    ASSERT_TRUE(traj.converged_at.has_value());
    EXPECT_EQ(traj.verdict, Verdict::kConverged);
    const auto& end = traj.terminal();
    const double d_star = std::max({std::abs(end.theta.prob(0) - 1.0),
                                    std::abs(end.q.scalar(0) - 2.0 / 3.0),
                                    std::abs(end.q.scalar(1) - 2.0 / 3.0)});
    const double d_bar = std::max({std::abs(end.theta.prob(0) - 0.5),
                                   std::abs(end.q.scalar(0) - 0.5),
                                   std::abs(end.q.scalar(1) - 0.5)});
    EXPECT_LT(std::min(d_star, d_bar), 0.05) << "seed " << seed;
  }
}

TEST(RunDynamics, PublicGoodReachesTheUniqueFixedPoint) {
  const PublicGoodGame game;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DynamicsConfig c;
    c.theta1 = B({0.5, 0.4, 0.1});
    c.q1 = StrategyProfile::Scalars({1.0, 0.0});
    c.schedule = StepsizeSchedule::PhaseShiftedHarmonic();
    c.max_steps = 20000;
    c.seed = seed;
    const Trajectory traj = RunDynamics(game, c);
    const auto& end = traj.terminal();
    EXPECT_NEAR(end.theta.prob(1), 1.0, 0.05);
    EXPECT_NEAR(end.q.scalar(0), 1.0 / 3.0, 0.05);
    EXPECT_NEAR(end.q.scalar(1), 1.0 / 3.0, 0.05);
  }
}

TEST(RunDynamics, ObservationIsDrawnAtTheRecordedProfile) {
  // With a = 0 the profile never moves, so every observation comes from q1.
  const CournotGame game;
  DynamicsConfig c = CournotConfig(3);
  c.schedule = StepsizeSchedule::Constant(0.0);
  c.max_steps = 20;
  c.stop_on_convergence = false;
  const Trajectory traj = RunDynamics(game, c);
  EXPECT_EQ(traj.steps.size(), 21u);
  Belief theta = c.theta1;
  for (std::size_t k = 0; k + 1 < traj.steps.size(); ++k) {
    ASSERT_TRUE(traj.steps[k].obs.has_value());
    theta = BayesUpdate(theta, game, traj.steps[k].q, *traj.steps[k].obs);
    EXPECT_NEAR(theta.prob(0), traj.steps[k + 1].theta.prob(0), 1e-14);
    EXPECT_EQ(traj.steps[k].t, k + 1);
  }
}

TEST(RunDynamics, RejectsInvalidInitialState) {
  const CournotGame game;
  DynamicsConfig c = CournotConfig(1);
  c.theta1 = B({1.0, 0.0});
  EXPECT_THROW(RunDynamics(game, c), BeliefplayError);
  c = CournotConfig(1);
  c.q1 = StrategyProfile::Scalars({-1.0, 0.0});
  EXPECT_THROW(RunDynamics(game, c), BeliefplayError);
}

TEST(RunDynamics, WithoutEarlyStopConvergenceMarksTheFinalStretch) {
  const CournotGame game;
  DynamicsConfig c = CournotConfig(5);
  c.stop_on_convergence = false;
  c.max_steps = 600;
  const Trajectory traj = RunDynamics(game, c);
  EXPECT_EQ(traj.steps.size(), 601u);
  ASSERT_TRUE(traj.converged_at.has_value());
  // Every state from the marked step on stays within the tolerance.
  for (std::size_t k = *traj.converged_at; k < traj.steps.size(); ++k) {
    EXPECT_LE(ProfileDistance(traj.steps[k].q, traj.steps[k - 1].q), 1e-6);
  }
}

TEST(RunDynamics, MapModeOnGrid) {
  MapGrid grid{{1.0, 0.5}, {3.0, 1.5}, {9, 9}};
  const std::vector<double> truth = {2.0, 1.0};
  const CournotGame game = CournotGame::OnGrid(grid, truth);
  DynamicsConfig c;
  c.mode = ParseMode("MAP-EQ");
  c.q1 = StrategyProfile::Scalars({0.25, 0.25});
  c.max_steps = 3000;
  c.stop_on_convergence = false;
  c.seed = 2;
  const Trajectory traj = RunDynamics(game, c);
  EXPECT_EQ(traj.terminal().estimate, truth);
  EXPECT_NEAR(traj.terminal().q.scalar(0), 2.0 / 3.0, 1e-12);
}

TEST(RunDynamics, OlsModeLearnsTheTrueCoefficients) {
  const CournotGame game;
  DynamicsConfig c;
  c.mode = ParseMode("OLS-EQ");
  c.theta1 = B({0.1, 0.9});
  c.q1 = StrategyProfile::Scalars({0.25, 0.25});
  c.schedule = StepsizeSchedule::Harmonic();
  c.max_steps = 5000;
  c.stop_on_convergence = false;
  c.seed = 4;
  const Trajectory traj = RunDynamics(game, c);
  ASSERT_EQ(traj.terminal().estimate.size(), 2u);
  // OLS is consistent only along directions the profiles explore; the
  // terminal equilibrium still has to be close to q* = (2/3, 2/3).
  EXPECT_NEAR(traj.terminal().q.scalar(0), 2.0 / 3.0, 0.1);
}

TEST(BrResiduals, ZeroWhenBeliefEqualsReference) {
  const CournotGame game;
  Trajectory traj;
  traj.mode = ParseMode("BR");
  for (int k = 0; k < 5; ++k) {
    TrajectoryStep s;
    s.theta = B({0.3, 0.7});
    s.q = StrategyProfile::Scalars({0.1 * k, 0.2});
    traj.steps.push_back(s);
  }
  const auto d = BrResiduals(traj, game, B({0.3, 0.7}));
  ASSERT_EQ(d.norms.size(), 4u);
  for (double n : d.norms) EXPECT_EQ(n, 0.0);
}

TEST(BrResiduals, HandComputedCournotResidual) {
  const CournotGame game;
  Trajectory traj;
  traj.mode = ParseMode("BR");
  TrajectoryStep s0, s1;
  s0.theta = B({0.5, 0.5});
  s0.q = StrategyProfile::Scalars({2.0 / 3.0, 2.0 / 3.0});
  s1.theta = B({0.9, 0.1});
  s1.q = s0.q;
  traj.steps = {s0, s1};
  const auto d = BrResiduals(traj, game, B({1.0, 0.0}));
  const double want = (2.2 - 1.2 * 2.0 / 3.0) / (2.0 * 1.2) - 2.0 / 3.0;
  ASSERT_EQ(d.residuals.size(), 1u);
  EXPECT_NEAR(d.residuals[0][0], want, 1e-14);
  EXPECT_NEAR(d.residuals[0][1], want, 1e-14);
  EXPECT_NEAR(d.norms[0], std::sqrt(2.0) * std::abs(want), 1e-14);
}

TEST(BrResiduals, TailVanishesOnAConvergingRun) {
  const PublicGoodGame game;
  DynamicsConfig c;
  c.mode = ParseMode("BR");
  c.theta1 = B({0.5, 0.4, 0.1});
  c.q1 = StrategyProfile::Scalars({1.0, 0.0});
  c.schedule = StepsizeSchedule::PhaseShiftedHarmonic();
  c.max_steps = 20000;
  c.seed = 7;
  const Trajectory traj = RunDynamics(game, c);
  const auto d = BrResiduals(traj, game, traj.terminal().theta);
  const std::size_t tail = d.norms.size() - d.norms.size() / 10;
  for (std::size_t k = tail; k < d.norms.size(); ++k) EXPECT_LT(d.norms[k], 1e-3);
}

}  // namespace
}  // namespace beliefplay
