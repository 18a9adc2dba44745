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

#include "beliefplay/games.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

namespace beliefplay {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::string> DefaultLabels(std::size_t n, const char* prefix) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < n; ++k) {
    labels.push_back(prefix + std::to_string(k));
  }
  return labels;
}

void CheckTwoScalarPlayers(const StrategyProfile& q) {
  if (q.players.size() != 2 || q.players[0].size() != 1 ||
      q.players[1].size() != 1) {
    throw BeliefplayError("expected two scalar strategies");
  }
}

void CheckPlayer(std::size_t player, std::size_t n) {
  if (player >= n) throw BeliefplayError("player index out of range");
}

// Feasible q1 range of the line q2 = q1 + offset inside the box.
StrategyProfile LineSelection(const StrategySpace& space, double anchor,
                              double offset) {
  const auto& p1 = space.player(0);
  const auto& p2 = space.player(1);
  const double lo = std::max(p1.lower[0], p2.lower[0] - offset);
  const double hi = std::min(p1.upper[0], p2.upper[0] - offset);
  if (lo > hi) {
    return ProjectStrategy(space,
                           StrategyProfile::Scalars({anchor, anchor + offset}));
  }
  const double q1 = std::clamp(anchor, lo, hi);
  return StrategyProfile::Scalars({q1, q1 + offset});
}

double GoldenSectionMax(const std::function<double(double)>& f, double lo,
                        double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  // Endpoints win for monotone objectives.
  double best = f(x);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe > best) {
      best = fe;
      x = e;
    }
  }
  return x;
}

}  // namespace

StrategyProfile AffineObservationModel::EquilibriumFromCoefficients(
    const std::vector<std::vector<double>>&) const {
  throw BeliefplayError("equilibrium from coefficients not supported");
}

BestResponseSet AffineObservationModel::BestResponseFromCoefficients(
    const std::vector<std::vector<double>>&, const StrategyProfile&,
    std::size_t) const {
  throw BeliefplayError("best response from coefficients not supported");
}

// ---------------------------------------------------------------------------
// Cournot

CournotGame::CournotGame(Options options)
    : alpha_(std::move(options.alpha)),
      beta_(std::move(options.beta)),
      noise_variance_(options.noise_variance),
      q_max_(options.q_max) {
  if (alpha_.size() != beta_.size() || alpha_.size() != options.labels.size()) {
    throw BeliefplayError("cournot parameter sizes differ");
  }
  for (double b : beta_) {
    if (!(b > 0.0)) throw BeliefplayError("cournot beta must be positive");
  }
  if (!(noise_variance_ > 0.0)) throw BeliefplayError("variance must be positive");
  if (!(q_max_ > 0.0)) throw BeliefplayError("q_max must be positive");
  space_ = StrategySpace::Intervals({{0.0, q_max_}, {0.0, q_max_}});
  params_ = ParameterSet(std::move(options.labels), options.true_index);
}

CournotGame CournotGame::OnGrid(const MapGrid& grid,
                                std::span<const double> truth,
                                double noise_variance, double q_max) {
  if (grid.dim() != 2) throw BeliefplayError("cournot grid must be 2-d");
  if (grid.size() == 0) throw BeliefplayError("empty grid");
  const auto truth_index = grid.Find(truth, 1e-9);
  if (!truth_index) throw BeliefplayError("true parameter is not a grid point");
  Options options;
  options.alpha.clear();
  options.beta.clear();
  options.labels.clear();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::vector<double> p = grid.Point(k);
    options.alpha.push_back(p[0]);
    options.beta.push_back(p[1]);
    options.labels.push_back("g" + std::to_string(k));
  }
  options.true_index = *truth_index;
  options.noise_variance = noise_variance;
  options.q_max = q_max;
  return CournotGame(std::move(options));
}

Capabilities CournotGame::capabilities() const {
  return {true, true, true, true};
}

std::vector<double> CournotGame::MeanPayoff(std::size_t s,
                                            const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  const double price = alpha_.at(s) - beta_.at(s) * (q.scalar(0) + q.scalar(1));
  return {q.scalar(0) * price, q.scalar(1) * price};
}

std::vector<std::string> CournotGame::observation_labels() const {
  return {"price"};
}

void CournotGame::ObservationMoments(std::size_t s, const StrategyProfile& q,
                                     std::span<const int>,
                                     std::span<double> mean,
                                     std::span<double> variance) const {
  CheckTwoScalarPlayers(q);
  mean[0] = alpha_.at(s) - beta_.at(s) * (q.scalar(0) + q.scalar(1));
  variance[0] = noise_variance_;
}

void CournotGame::LogLikelihoods(const StrategyProfile& q,
                                 const PayoffObservation& obs,
                                 std::span<double> out) const {
  CheckTwoScalarPlayers(q);
  if (obs.values.size() != 1) throw BeliefplayError("observation dimension mismatch");
  if (out.size() != alpha_.size()) throw BeliefplayError("buffer size mismatch");
  const double total = q.scalar(0) + q.scalar(1);
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s] = GaussianLogDensity(obs.values[0], alpha_[s] - beta_[s] * total,
                                noise_variance_);
  }
}

StrategyProfile CournotGame::EquilibriumForMeans(double alpha,
                                                 double beta) const {
  const double q = std::clamp(alpha / (3.0 * beta), 0.0, q_max_);
  return StrategyProfile::Scalars({q, q});
}

BestResponseSet CournotGame::BestResponseForMeans(double alpha, double beta,
                                                  const StrategyProfile& q,
                                                  std::size_t player) const {
  CheckTwoScalarPlayers(q);
  CheckPlayer(player, 2);
  const double other = q.scalar(1 - player);
  return BestResponseSet::Point(
      std::clamp((alpha - beta * other) / (2.0 * beta), 0.0, q_max_));
}

StrategyProfile CournotGame::EquilibriumMap(const Belief& theta) const {
  return EquilibriumForMeans(theta.Expect(alpha_), theta.Expect(beta_));
}

BestResponseSet CournotGame::BestResponseMap(const Belief& theta,
                                             const StrategyProfile& q,
                                             std::size_t player) const {
  return BestResponseForMeans(theta.Expect(alpha_), theta.Expect(beta_), q,
                              player);
}

double CournotGame::Potential(std::size_t s, const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  const double q1 = q.scalar(0), q2 = q.scalar(1);
  return alpha_.at(s) * (q1 + q2) - beta_.at(s) * (q1 * q1 + q2 * q2) -
         beta_.at(s) * q1 * q2;
}

std::vector<double> CournotGame::Regressor(const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  return {q.scalar(0) + q.scalar(1), 1.0};
}

std::vector<std::vector<double>> CournotGame::Coefficients(
    std::size_t s) const {
  return {{-beta_.at(s), alpha_.at(s)}};
}

StrategyProfile CournotGame::EquilibriumFromCoefficients(
    const std::vector<std::vector<double>>& b) const {
  const double alpha = b.at(0).at(1), beta = -b.at(0).at(0);
  // A non-decreasing estimated price makes output unbounded.
  if (!(beta > 1e-12)) {
    const double q = alpha > 0.0 ? q_max_ : 0.0;
    return StrategyProfile::Scalars({q, q});
  }
  return EquilibriumForMeans(alpha, beta);
}

BestResponseSet CournotGame::BestResponseFromCoefficients(
    const std::vector<std::vector<double>>& b, const StrategyProfile& q,
    std::size_t player) const {
  const double alpha = b.at(0).at(1), beta = -b.at(0).at(0);
  if (!(beta > 1e-12)) {
    return BestResponseSet::Point(alpha > 0.0 ? q_max_ : 0.0);
  }
  return BestResponseForMeans(alpha, beta, q, player);
}

std::vector<double> CournotGame::CoordinatesFromCoefficients(
    const std::vector<std::vector<double>>& b) const {
  return {b.at(0).at(1), -b.at(0).at(0)};
}

std::vector<double> CournotGame::PayoffsFromObservation(
    const StrategyProfile& q, const PayoffObservation& obs) const {
  CheckTwoScalarPlayers(q);
  return {q.scalar(0) * obs.values.at(0), q.scalar(1) * obs.values.at(0)};
}

double CournotGame::PayoffLogDensity(std::size_t s, const StrategyProfile& q,
                                     std::span<const double> payoffs) const {
  CheckTwoScalarPlayers(q);
  const double q1 = q.scalar(0);
  if (!(q1 > 0.0)) throw BeliefplayError("payoff density needs q1 > 0");
  const double total = q1 + q.scalar(1);
  const double mean = q1 * alpha_.at(s) - q1 * beta_.at(s) * total;
  return GaussianLogDensity(payoffs[0], mean, q1 * q1 * noise_variance_);
}

// ---------------------------------------------------------------------------
// Coordination with a safe margin

CoordinationSafeMarginGame::CoordinationSafeMarginGame(Options options)
    : options_(std::move(options)) {
  if (options_.margins.size() != options_.labels.size()) {
    throw BeliefplayError("margin and label sizes differ");
  }
  for (double m : options_.margins) {
    if (!(m >= 0.0)) throw BeliefplayError("margins must be nonnegative");
  }
  if (!(options_.noise_variance > 0.0) || !(options_.penalty_weight > 0.0)) {
    throw BeliefplayError("variance and penalty weight must be positive");
  }
  space_ = StrategySpace::Intervals({options_.q1_bounds, options_.q2_bounds});
  params_ = ParameterSet(options_.labels, options_.true_index);
}

Capabilities CoordinationSafeMarginGame::capabilities() const {
  return {true, true, true, true};
}

double CoordinationSafeMarginGame::Penalty(std::size_t s, double gap) const {
  const double m = options_.margins.at(s);
  const double excess = std::max(std::abs(gap), m) - m;
  return -options_.penalty_weight * excess * excess;
}

std::vector<double> CoordinationSafeMarginGame::MeanPayoff(
    std::size_t s, const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  const double p = Penalty(s, q.scalar(0) - q.scalar(1));
  return {p - q.scalar(0), p + q.scalar(1)};
}

std::vector<std::string> CoordinationSafeMarginGame::observation_labels()
    const {
  return {"c1", "c2"};
}

void CoordinationSafeMarginGame::ObservationMoments(
    std::size_t s, const StrategyProfile& q, std::span<const int>,
    std::span<double> mean, std::span<double> variance) const {
  const std::vector<double> u = MeanPayoff(s, q);
  mean[0] = u[0];
  mean[1] = u[1];
  variance[0] = variance[1] = options_.noise_variance;
}

double CoordinationSafeMarginGame::Offset(const Belief& theta) const {
  if (theta.size() != options_.margins.size()) {
    throw BeliefplayError("belief size does not match parameter set");
  }
  std::vector<std::size_t> order(theta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return options_.margins[a] < options_.margins[b];
  });
  // f(D) = 2 w sum_{s: m_s < D} theta_s (D - m_s) is piecewise linear.
  const double w2 = 2.0 * options_.penalty_weight;
  double mass = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t s = order[k];
    mass += theta.prob(s);
    weighted += theta.prob(s) * options_.margins[s];
    if (mass <= 0.0) continue;
    const double d = (1.0 + w2 * weighted) / (w2 * mass);
    const bool last = k + 1 == order.size();
    if (last || d <= options_.margins[order[k + 1]]) return d;
  }
  throw BeliefplayError("equilibrium offset not found");
}

std::optional<double> CoordinationSafeMarginGame::EquilibriumLineOffset(
    const Belief& theta) const {
  return Offset(theta);
}

StrategyProfile CoordinationSafeMarginGame::EquilibriumMap(
    const Belief& theta) const {
  return LineSelection(space_, options_.anchor, Offset(theta));
}

BestResponseSet CoordinationSafeMarginGame::BestResponseMap(
    const Belief& theta, const StrategyProfile& q, std::size_t player) const {
  CheckTwoScalarPlayers(q);
  CheckPlayer(player, 2);
  const double d = Offset(theta);
  if (player == 0) {
    return BestResponseSet::Point(std::clamp(
        q.scalar(1) - d, options_.q1_bounds.first, options_.q1_bounds.second));
  }
  return BestResponseSet::Point(std::clamp(
      q.scalar(0) + d, options_.q2_bounds.first, options_.q2_bounds.second));
}

double CoordinationSafeMarginGame::Potential(std::size_t s,
                                             const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  return Penalty(s, q.scalar(0) - q.scalar(1)) - q.scalar(0) + q.scalar(1);
}

// ---------------------------------------------------------------------------
// Coordination with an increasing penalty

CoordinationIncreasingPenaltyGame::CoordinationIncreasingPenaltyGame(
    Options options)
    : options_(std::move(options)) {
  if (options_.penalties.size() != options_.labels.size()) {
    throw BeliefplayError("penalty and label sizes differ");
  }
  for (double p : options_.penalties) {
    if (!(p >= 1.0)) throw BeliefplayError("penalty slopes must be >= 1");
  }
  if (!(options_.noise_variance > 0.0) || !(options_.knee > 0.0)) {
    throw BeliefplayError("variance and knee must be positive");
  }
  space_ = StrategySpace::Intervals({options_.q1_bounds, options_.q2_bounds});
  params_ = ParameterSet(options_.labels, options_.true_index);
}

Capabilities CoordinationIncreasingPenaltyGame::capabilities() const {
  return {true, true, true, true};
}

double CoordinationIncreasingPenaltyGame::Cost(std::size_t s,
                                               double gap) const {
  const double d = std::abs(gap);
  const double knee = options_.knee;
  if (d <= knee) return d * d;
  const double v = knee + options_.penalties.at(s) * (d - knee);
  return v * v;
}

double CoordinationIncreasingPenaltyGame::CostSlope(std::size_t s,
                                                    double d) const {
  const double knee = options_.knee;
  if (d < knee) return 2.0 * d;
  const double p = options_.penalties.at(s);
  return 2.0 * p * (knee + p * (d - knee));
}

std::vector<double> CoordinationIncreasingPenaltyGame::MeanPayoff(
    std::size_t s, const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  const double c = Cost(s, q.scalar(0) - q.scalar(1));
  return {-c - q.scalar(0), -c + q.scalar(1)};
}

std::vector<std::string> CoordinationIncreasingPenaltyGame::observation_labels()
    const {
  return {"c1", "c2"};
}

void CoordinationIncreasingPenaltyGame::ObservationMoments(
    std::size_t s, const StrategyProfile& q, std::span<const int>,
    std::span<double> mean, std::span<double> variance) const {
  const std::vector<double> u = MeanPayoff(s, q);
  mean[0] = u[0];
  mean[1] = u[1];
  variance[0] = variance[1] = options_.noise_variance;
}

double CoordinationIncreasingPenaltyGame::Offset(const Belief& theta) const {
  if (theta.size() != options_.penalties.size()) {
    throw BeliefplayError("belief size does not match parameter set");
  }
  // Inside the knee the cost does not depend on s: D = 1/2 if it fits.
  if (0.5 < options_.knee) return 0.5;
  auto slope = [&](double d) {
    double sum = 0.0;
    for (std::size_t s = 0; s < theta.size(); ++s) {
      sum += theta.prob(s) * CostSlope(s, d);
    }
    return sum;
  };
  double lo = 0.0, hi = options_.knee;
  while (slope(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 1.0 ? lo : hi) = mid;
  }
  return hi;
}

std::optional<double> CoordinationIncreasingPenaltyGame::EquilibriumLineOffset(
    const Belief& theta) const {
  return Offset(theta);
}

StrategyProfile CoordinationIncreasingPenaltyGame::EquilibriumMap(
    const Belief& theta) const {
  return LineSelection(space_, options_.anchor, Offset(theta));
}

BestResponseSet CoordinationIncreasingPenaltyGame::BestResponseMap(
    const Belief& theta, const StrategyProfile& q, std::size_t player) const {
  CheckTwoScalarPlayers(q);
  CheckPlayer(player, 2);
  const std::vector<double> probs = theta.Probabilities();
  const double other = q.scalar(1 - player);
  auto objective = [&](double x) {
    const double gap = player == 0 ? x - other : other - x;
    double cost = 0.0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
      if (probs[s] > 0.0) cost += probs[s] * Cost(s, gap);
    }
    return player == 0 ? -cost - x : -cost + x;
  };
  const auto& bounds = player == 0 ? options_.q1_bounds : options_.q2_bounds;
  return BestResponseSet::Point(GoldenSectionMax(
      objective, bounds.first, bounds.second, options_.search_tolerance));
}

double CoordinationIncreasingPenaltyGame::Potential(
    std::size_t s, const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  return -Cost(s, q.scalar(0) - q.scalar(1)) - q.scalar(0) + q.scalar(1);
}

// ---------------------------------------------------------------------------
// Public good

PublicGoodGame::PublicGoodGame(Options options) : options_(std::move(options)) {
  if (options_.alpha.size() != options_.variance.size() ||
      options_.alpha.size() != options_.labels.size()) {
    throw BeliefplayError("public good parameter sizes differ");
  }
  for (double v : options_.variance) {
    if (!(v > 0.0)) throw BeliefplayError("variance must be positive");
  }
  space_ = StrategySpace::Intervals({{0.0, options_.q_max}, {0.0, options_.q_max}});
  params_ = ParameterSet(options_.labels, options_.true_index);
}

Capabilities PublicGoodGame::capabilities() const {
  return {true, true, false, true};
}

std::vector<double> PublicGoodGame::MeanPayoff(std::size_t s,
                                               const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  const double a = options_.alpha.at(s);
  const double q1 = q.scalar(0), q2 = q.scalar(1);
  return {q1 * (a - 2.0 * q1 + q2), q2 * (a - 2.0 * q2 + q1)};
}

std::vector<std::string> PublicGoodGame::observation_labels() const {
  return {"return"};
}

void PublicGoodGame::ObservationMoments(std::size_t s, const StrategyProfile& q,
                                        std::span<const int>,
                                        std::span<double> mean,
                                        std::span<double> variance) const {
  CheckTwoScalarPlayers(q);
  mean[0] = options_.alpha.at(s) + q.scalar(0) + q.scalar(1);
  variance[0] = options_.variance.at(s);
}

StrategyProfile PublicGoodGame::EquilibriumMap(const Belief& theta) const {
  const double q = std::clamp(theta.Expect(options_.alpha) / 3.0, 0.0,
                              options_.q_max);
  return StrategyProfile::Scalars({q, q});
}

BestResponseSet PublicGoodGame::BestResponseMap(const Belief& theta,
                                                const StrategyProfile& q,
                                                std::size_t player) const {
  CheckTwoScalarPlayers(q);
  CheckPlayer(player, 2);
  const double a = theta.Expect(options_.alpha);
  return BestResponseSet::Point(
      std::clamp((a + q.scalar(1 - player)) / 4.0, 0.0, options_.q_max));
}

std::vector<double> PublicGoodGame::Regressor(const StrategyProfile& q) const {
  CheckTwoScalarPlayers(q);
  return {q.scalar(0) + q.scalar(1), 1.0};
}

std::vector<std::vector<double>> PublicGoodGame::Coefficients(
    std::size_t s) const {
  return {{1.0, options_.alpha.at(s)}};
}

// With return mean a + b (q1 + q2), player i maximizes
// q_i (a + b q_i + b q_-i) - 3 q_i^2.
StrategyProfile PublicGoodGame::EquilibriumFromCoefficients(
    const std::vector<std::vector<double>>& b) const {
  const double slope = b.at(0).at(0), a = b.at(0).at(1);
  const double denom = 6.0 - 3.0 * slope;
  const double q = denom > 1e-12 ? std::clamp(a / denom, 0.0, options_.q_max)
                                 : options_.q_max;
  return StrategyProfile::Scalars({q, q});
}

BestResponseSet PublicGoodGame::BestResponseFromCoefficients(
    const std::vector<std::vector<double>>& b, const StrategyProfile& q,
    std::size_t player) const {
  CheckTwoScalarPlayers(q);
  CheckPlayer(player, 2);
  const double slope = b.at(0).at(0), a = b.at(0).at(1);
  const double denom = 6.0 - 2.0 * slope;
  if (!(denom > 1e-12)) return BestResponseSet::Point(options_.q_max);
  return BestResponseSet::Point(std::clamp(
      (a + slope * q.scalar(1 - player)) / denom, 0.0, options_.q_max));
}

std::vector<double> PublicGoodGame::CoordinatesFromCoefficients(
    const std::vector<std::vector<double>>& b) const {
  return {b.at(0).at(1)};
}

std::vector<double> PublicGoodGame::PayoffsFromObservation(
    const StrategyProfile& q, const PayoffObservation& obs) const {
  CheckTwoScalarPlayers(q);
  const double r = obs.values.at(0);
  const double q1 = q.scalar(0), q2 = q.scalar(1);
  return {q1 * r - 3.0 * q1 * q1, q2 * r - 3.0 * q2 * q2};
}

double PublicGoodGame::PayoffLogDensity(std::size_t s, const StrategyProfile& q,
                                        std::span<const double> payoffs) const {
  CheckTwoScalarPlayers(q);
  const double q1 = q.scalar(0), q2 = q.scalar(1);
  if (!(q1 > 0.0)) throw BeliefplayError("payoff density needs q1 > 0");
  // c_1 = q_1 (alpha - 2 q_1 + q_2) + q_1 eps.
  const double mean = q1 * (options_.alpha.at(s) - 2.0 * q1 + q2);
  return GaussianLogDensity(payoffs[0], mean,
                            q1 * q1 * options_.variance.at(s));
}

// ---------------------------------------------------------------------------
// Finite matrix game

FiniteMatrixGame::Options FiniteMatrixGame::DefaultOptions() {
  Options o;
  // Profiles (0,0), (0,1), (1,0), (1,1).
  o.means = {
      {{1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, {3.0, 3.0}},
      {{1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, {-3.0, -3.0}},
  };
  return o;
}

FiniteMatrixGame::FiniteMatrixGame(Options options)
    : options_(std::move(options)) {
  if (options_.num_actions.size() != 2) {
    throw BeliefplayError("matrix game needs two players");
  }
  const std::size_t profiles = options_.num_actions[0] * options_.num_actions[1];
  if (options_.means.size() != options_.labels.size()) {
    throw BeliefplayError("payoff table and label sizes differ");
  }
  for (const auto& table : options_.means) {
    if (table.size() != profiles) throw BeliefplayError("payoff table size");
    for (const auto& row : table) {
      if (row.size() != 2) throw BeliefplayError("payoff table size");
    }
  }
  if (options_.noise_variance.size() != 2) {
    throw BeliefplayError("need one variance per player");
  }
  for (double v : options_.noise_variance) {
    if (!(v > 0.0)) throw BeliefplayError("variance must be positive");
  }
  space_ = StrategySpace::Simplices(options_.num_actions);
  params_ = ParameterSet(options_.labels, options_.true_index);
}

Capabilities FiniteMatrixGame::capabilities() const {
  return {false, true, false, true};
}

std::size_t FiniteMatrixGame::ProfileIndex(std::span<const int> actions) const {
  if (actions.size() != 2) throw BeliefplayError("expected an action profile");
  for (std::size_t i = 0; i < 2; ++i) {
    if (actions[i] < 0 ||
        static_cast<std::size_t>(actions[i]) >= options_.num_actions[i]) {
      throw BeliefplayError("action out of range");
    }
  }
  return static_cast<std::size_t>(actions[0]) * options_.num_actions[1] +
         static_cast<std::size_t>(actions[1]);
}

double FiniteMatrixGame::Mean(std::size_t s, std::span<const int> actions,
                              std::size_t player) const {
  return options_.means.at(s).at(ProfileIndex(actions)).at(player);
}

std::vector<double> FiniteMatrixGame::MeanPayoff(
    std::size_t s, const StrategyProfile& q) const {
  if (!space_.SameShape(q)) throw BeliefplayError("profile shape mismatch");
  std::vector<double> u(2, 0.0);
  for (std::size_t a = 0; a < options_.num_actions[0]; ++a) {
    for (std::size_t b = 0; b < options_.num_actions[1]; ++b) {
      const double w = q.players[0][a] * q.players[1][b];
      const auto& m = options_.means.at(s)[a * options_.num_actions[1] + b];
      u[0] += w * m[0];
      u[1] += w * m[1];
    }
  }
  return u;
}

std::vector<std::string> FiniteMatrixGame::observation_labels() const {
  return {"c1", "c2"};
}

void FiniteMatrixGame::ObservationMoments(std::size_t s,
                                          const StrategyProfile&,
                                          std::span<const int> actions,
                                          std::span<double> mean,
                                          std::span<double> variance) const {
  for (std::size_t i = 0; i < 2; ++i) {
    mean[i] = Mean(s, actions, i);
    variance[i] = options_.noise_variance[i];
  }
}

std::vector<ChannelBranch> FiniteMatrixGame::Branches(
    const StrategyProfile& q) const {
  if (!space_.SameShape(q)) throw BeliefplayError("profile shape mismatch");
  std::vector<ChannelBranch> branches;
  for (std::size_t a = 0; a < options_.num_actions[0]; ++a) {
    for (std::size_t b = 0; b < options_.num_actions[1]; ++b) {
      const double w = q.players[0][a] * q.players[1][b];
      if (w > 0.0) {
        branches.push_back({w, {static_cast<int>(a), static_cast<int>(b)}});
      }
    }
  }
  return branches;
}

PayoffObservation FiniteMatrixGame::SampleObservationFrom(
    std::size_t s, const StrategyProfile& q, Rng& rng) const {
  PayoffObservation obs;
  obs.actions = SampleActionProfile(q, rng);
  obs.values.resize(2);
  for (std::size_t i = 0; i < 2; ++i) {
    obs.values[i] = Mean(s, obs.actions, i) +
                    std::sqrt(options_.noise_variance[i]) * StandardNormal(rng);
  }
  return obs;
}

BestResponseSet FiniteMatrixGame::BestResponseMap(const Belief& theta,
                                                  const StrategyProfile& q,
                                                  std::size_t player) const {
  CheckPlayer(player, 2);
  if (!space_.SameShape(q)) throw BeliefplayError("profile shape mismatch");
  const std::size_t other = 1 - player;
  const std::vector<double> probs = theta.Probabilities();
  std::vector<double> value(options_.num_actions[player], 0.0);
  for (std::size_t a = 0; a < value.size(); ++a) {
    for (std::size_t b = 0; b < options_.num_actions[other]; ++b) {
      const double w = q.players[other][b];
      if (w == 0.0) continue;
      const int actions[2] = {
          static_cast<int>(player == 0 ? a : b),
          static_cast<int>(player == 0 ? b : a)};
      for (std::size_t s = 0; s < probs.size(); ++s) {
        if (probs[s] > 0.0) value[a] += w * probs[s] * Mean(s, actions, player);
      }
    }
  }
  const double best = *std::max_element(value.begin(), value.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<bool> face(value.size());
  for (std::size_t a = 0; a < value.size(); ++a) face[a] = value[a] >= best - tol;
  return BestResponseSet::Face(std::move(face));
}

std::vector<int> SampleActionProfile(const StrategyProfile& q, Rng& rng) {
  std::vector<int> actions;
  for (const PlayerStrategy& p : q.players) {
    if (p.empty()) throw BeliefplayError("empty mixed strategy");
    const double u = Uniform01(rng);
    double cumulative = 0.0;
    int chosen = -1;
    int last_positive = -1;
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (p[a] < 0.0) throw BeliefplayError("negative action probability");
      if (p[a] > 0.0) last_positive = static_cast<int>(a);
      cumulative += p[a];
      if (chosen < 0 && p[a] > 0.0 && u < cumulative) chosen = static_cast<int>(a);
    }
    if (last_positive < 0) throw BeliefplayError("mixed strategy has no mass");
    actions.push_back(chosen >= 0 ? chosen : last_positive);
  }
  return actions;
}

// ---------------------------------------------------------------------------
// Affine Gaussian game

AffineGaussianGame::AffineGaussianGame(Options options)
    : options_(std::move(options)) {
  const std::size_t n = options_.bounds.size();
  if (n == 0) throw BeliefplayError("affine game needs players");
  if (options_.candidates.empty()) throw BeliefplayError("no candidates");
  for (const auto& c : options_.candidates) {
    if (c.size() != n * (n + 1)) {
      throw BeliefplayError("candidate must have n (n + 1) coefficients");
    }
  }
  if (options_.labels.empty()) {
    options_.labels = DefaultLabels(options_.candidates.size(), "g");
  }
  if (options_.labels.size() != options_.candidates.size()) {
    throw BeliefplayError("candidate and label sizes differ");
  }
  if (!(options_.noise_variance > 0.0)) {
    throw BeliefplayError("variance must be positive");
  }
  space_ = StrategySpace::Intervals(options_.bounds);
  params_ = ParameterSet(options_.labels, options_.true_index);
}

AffineGaussianGame AffineGaussianGame::OnGrid(
    const MapGrid& grid, std::span<const double> truth,
    std::vector<std::pair<double, double>> bounds, double noise_variance) {
  const auto truth_index = grid.Find(truth, 1e-9);
  if (!truth_index) throw BeliefplayError("true parameter is not a grid point");
  Options o;
  o.bounds = std::move(bounds);
  o.candidates.clear();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    o.candidates.push_back(grid.Point(k));
  }
  o.true_index = *truth_index;
  o.noise_variance = noise_variance;
  return AffineGaussianGame(std::move(o));
}

std::vector<double> AffineGaussianGame::MeanPayoff(
    std::size_t s, const StrategyProfile& q) const {
  if (!space_.SameShape(q)) throw BeliefplayError("profile shape mismatch");
  const std::size_t n = space_.num_players();
  const auto& c = options_.candidates.at(s);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = c[i * (n + 1) + n];
    for (std::size_t j = 0; j < n; ++j) v += c[i * (n + 1) + j] * q.scalar(j);
    u[i] = v;
  }
  return u;
}

void AffineGaussianGame::ObservationMoments(std::size_t s,
                                            const StrategyProfile& q,
                                            std::span<const int>,
                                            std::span<double> mean,
                                            std::span<double> variance) const {
  const std::vector<double> u = MeanPayoff(s, q);
  for (std::size_t i = 0; i < u.size(); ++i) {
    mean[i] = u[i];
    variance[i] = options_.noise_variance;
  }
}

void AffineGaussianGame::LogLikelihoods(const StrategyProfile& q,
                                        const PayoffObservation& obs,
                                        std::span<double> out) const {
  const std::size_t n = space_.num_players();
  if (!space_.SameShape(q)) throw BeliefplayError("profile shape mismatch");
  if (obs.values.size() != n) throw BeliefplayError("observation dimension mismatch");
  if (out.size() != options_.candidates.size()) {
    throw BeliefplayError("buffer size mismatch");
  }
  const double v = options_.noise_variance;
  const double norm = -0.5 * std::log(2.0 * std::numbers::pi * v);
  for (std::size_t s = 0; s < out.size(); ++s) {
    const auto& c = options_.candidates[s];
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = c[i * (n + 1) + n];
      for (std::size_t j = 0; j < n; ++j) m += c[i * (n + 1) + j] * q.scalar(j);
      const double d = obs.values[i] - m;
      ll += norm - d * d / (2.0 * v);
    }
    out[s] = ll;
  }
}

std::vector<double> AffineGaussianGame::Regressor(
    const StrategyProfile& q) const {
  std::vector<double> x = q.Flatten();
  x.push_back(1.0);
  return x;
}

std::vector<std::vector<double>> AffineGaussianGame::Coefficients(
    std::size_t s) const {
  const std::size_t n = space_.num_players();
  const auto& c = options_.candidates.at(s);
  std::vector<std::vector<double>> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i].assign(c.begin() + static_cast<long>(i * (n + 1)),
                c.begin() + static_cast<long>((i + 1) * (n + 1)));
  }
  return b;
}

std::vector<double> AffineGaussianGame::CoordinatesFromCoefficients(
    const std::vector<std::vector<double>>& b) const {
  std::vector<double> out;
  for (const auto& row : b) out.insert(out.end(), row.begin(), row.end());
  return out;
}

std::vector<std::string> AffineGaussianGame::coordinate_labels() const {
  const std::size_t n = space_.num_players();
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      labels.push_back("b" + std::to_string(i) + "_" +
                       (j == n ? std::string("c") : std::to_string(j)));
    }
  }
  return labels;
}

}  // namespace beliefplay
