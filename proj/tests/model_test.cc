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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "beliefplay/model.h"
#include "beliefplay/random.h"

namespace beliefplay {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(NormalizeBelief, AlreadyNormalizedIsUnchanged) {
  const std::vector<double> lw = {std::log(0.5), std::log(0.5)};
  const Belief b = NormalizeBelief(lw);
  EXPECT_NEAR(b.log_prob(0), std::log(0.5), 1e-15);
  EXPECT_NEAR(b.log_prob(1), std::log(0.5), 1e-15);
}

TEST(NormalizeBelief, EqualWeightsBecomeUniform) {
  const std::vector<double> lw = {0.0, 0.0};
  const Belief b = NormalizeBelief(lw);
  EXPECT_NEAR(b.prob(0), 0.5, 1e-15);
  EXPECT_NEAR(b.prob(1), 0.5, 1e-15);
}

TEST(NormalizeBelief, ZeroMassStaysZero) {
  const std::vector<double> lw = {0.0, -kInf};
  const Belief b = NormalizeBelief(lw);
  EXPECT_EQ(b.log_prob(0), 0.0);
  EXPECT_EQ(b.log_prob(1), -kInf);
  EXPECT_EQ(b.Support(), std::vector<std::size_t>{0});
}

TEST(NormalizeBelief, AllMinusInfinityThrows) {
  const std::vector<double> lw = {-kInf, -kInf};
  EXPECT_THROW(NormalizeBelief(lw), BeliefplayError);
}

TEST(NormalizeBelief, LargeOffsetsDoNotOverflow) {
  const std::vector<double> lw = {1000.0, 1000.0 + std::log(3.0)};
  const Belief b = NormalizeBelief(lw);
  // 1000 + log 3 itself carries ~1e-13 of rounding.
  EXPECT_NEAR(b.prob(0), 0.25, 1e-12);
  EXPECT_NEAR(b.prob(1), 0.75, 1e-12);
}

TEST(Belief, FromProbabilitiesAndExpect) {
  const std::vector<double> p = {0.2, 0.0, 0.8};
  const Belief b = Belief::FromProbabilities(p);
  EXPECT_NEAR(b.prob(0), 0.2, 1e-15);
  EXPECT_EQ(b.prob(1), 0.0);
  const std::vector<double> values = {10.0, 99.0, 1.0};
  EXPECT_NEAR(b.Expect(values), 2.8, 1e-14);
  EXPECT_EQ(b.Support(), (std::vector<std::size_t>{0, 2}));
}

TEST(Belief, UniformAndPointMass) {
  const Belief u = Belief::Uniform(4);
  for (std::size_t s = 0; s < 4; ++s) EXPECT_NEAR(u.prob(s), 0.25, 1e-15);
  const Belief d = Belief::PointMass(3, 1);
  EXPECT_EQ(d.prob(1), 1.0);
  EXPECT_EQ(d.prob(0), 0.0);
  EXPECT_NEAR(BeliefDistance(u, Belief::Uniform(4)), 0.0, 1e-15);
}

TEST(LogSumExp, MatchesDirectSum) {
  const std::vector<double> x = {0.1, -2.0, 1.5};
  double direct = 0.0;
  for (double v : x) direct += std::exp(v);
  EXPECT_NEAR(LogSumExp(x), std::log(direct), 1e-14);
}

TEST(ProjectStrategy, ClampsIntoBox) {
  const StrategySpace space = StrategySpace::Intervals({{0.0, 2.0}});
  const StrategyProfile p = ProjectStrategy(space, StrategyProfile::Scalars({3.0}));
  EXPECT_EQ(p.scalar(0), 2.0);
}

TEST(ProjectStrategy, InteriorPointUnchanged) {
  const StrategySpace space = StrategySpace::Intervals({{0.0, 2.0}, {1.0, 4.0}});
  const StrategyProfile q = StrategyProfile::Scalars({0.7, 3.2});
  EXPECT_EQ(ProjectStrategy(space, q), q);
}

TEST(ProjectStrategy, SimplexExample) {
  const std::vector<std::size_t> dims = {2};
  const StrategySpace space = StrategySpace::Simplices(dims);
  StrategyProfile q;
  q.players = {{0.6, 0.6}};
  const StrategyProfile p = ProjectStrategy(space, q);
  EXPECT_NEAR(p.players[0][0], 0.5, 1e-15);
  EXPECT_NEAR(p.players[0][1], 0.5, 1e-15);
}

// Oracle: the projection is max(v - tau, 0) with tau the root of
// sum max(v - tau, 0) = 1, found by bisection.
std::vector<double> BisectionProjection(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double total = 0.0;
    for (double x : v) total += std::max(x - mid, 0.0);
    (total > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> out;
  for (double x : v) out.push_back(std::max(x - 0.5 * (lo + hi), 0.0));
  return out;
}

TEST(ProjectToSimplex, AgreesWithBisectionOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> v(n);
    for (double& x : v) x = 4.0 * Uniform01(rng) - 2.0;
    const auto got = ProjectToSimplex(v);
    const auto want = BisectionProjection(v);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
    EXPECT_NEAR(std::accumulate(got.begin(), got.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(StrategySpace, SamplesAreFeasible) {
  Rng rng(3);
  const StrategySpace box = StrategySpace::Intervals({{0.0, 2.0}, {1.0, 4.0}});
  const std::vector<std::size_t> dims = {3, 2};
  const StrategySpace simplex = StrategySpace::Simplices(dims);
  for (int k = 0; k < 100; ++k) {
    EXPECT_TRUE(box.Contains(box.Sample(rng)));
    EXPECT_TRUE(simplex.Contains(simplex.Sample(rng), 1e-12));
  }
  EXPECT_FALSE(box.Contains(StrategyProfile::Scalars({2.5, 2.0})));
  EXPECT_FALSE(box.SameShape(StrategyProfile::Scalars({1.0})));
}

TEST(BestResponseSet, IntervalDistanceAndNearest) {
  const BestResponseSet br = BestResponseSet::Interval(1.0, 2.0);
  const std::vector<double> inside = {1.5}, below = {0.25};
  EXPECT_EQ(br.Distance(inside), 0.0);
  EXPECT_NEAR(br.Distance(below), 0.75, 1e-15);
  EXPECT_EQ(br.Nearest(below)[0], 1.0);
  EXPECT_EQ(br.Selection()[0], 1.5);
}

TEST(BestResponseSet, FaceSelectionIsBarycenter) {
  const BestResponseSet br = BestResponseSet::Face({true, false, true});
  const auto sel = br.Selection();
  EXPECT_NEAR(sel[0], 0.5, 1e-15);
  EXPECT_EQ(sel[1], 0.0);
  EXPECT_NEAR(sel[2], 0.5, 1e-15);
  const std::vector<double> on_face = {0.3, 0.0, 0.7};
  EXPECT_NEAR(br.Distance(on_face), 0.0, 1e-15);
  const std::vector<double> off_face = {0.0, 1.0, 0.0};
  EXPECT_GT(br.Distance(off_face), 0.5);
}

TEST(GaussianLogDensity, MatchesFormula) {
  const double x = 0.3, m = -0.2, v = 2.0;
  const double want = -0.5 * std::log(2.0 * M_PI * v) - (x - m) * (x - m) / (2.0 * v);
  EXPECT_NEAR(GaussianLogDensity(x, m, v), want, 1e-15);
}

TEST(Random, SeedsAreStableAndDistinct) {
  EXPECT_EQ(DeriveSeed(7, 3), DeriveSeed(7, 3));
  EXPECT_NE(DeriveSeed(7, 3), DeriveSeed(7, 4));
  EXPECT_NE(DeriveSeed(7, 3), DeriveSeed(8, 3));
  Rng a(5), b(5);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(StandardNormal(a), StandardNormal(b));
}

TEST(Random, UniformMomentsAreSane) {
  Rng rng(19);
  double sum = 0.0, sq = 0.0;
  constexpr int kN = 200000;
  for (int k = 0; k < kN; ++k) {
    const double z = StandardNormal(rng);
    sum += z;
    sq += z * z;
    const double u = Uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_NEAR(sum / kN, 0.0, 0.01);
  EXPECT_NEAR(sq / kN, 1.0, 0.02);
}

}  // namespace
}  // namespace beliefplay
