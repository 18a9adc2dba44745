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

#include "beliefplay/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace beliefplay {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

ParameterSet::ParameterSet(std::vector<std::string> labels,
                           std::size_t true_index)
    : labels_(std::move(labels)), true_index_(true_index) {
  if (labels_.empty()) throw BeliefplayError("empty parameter set");
  if (true_index_ >= labels_.size()) {
    throw BeliefplayError("true parameter index out of range");
  }
}

double LogSumExp(std::span<const double> x) {
  double m = kNegInf;
  for (double v : x) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

Belief NormalizeBelief(std::span<const double> log_weights) {
  return Belief::FromLogWeights(log_weights);
}

Belief Belief::Uniform(std::size_t n) {
  if (n == 0) throw BeliefplayError("empty belief");
  Belief b;
  b.log_probs_.assign(n, -std::log(static_cast<double>(n)));
  return b;
}

Belief Belief::PointMass(std::size_t n, std::size_t s) {
  if (s >= n) throw BeliefplayError("point mass index out of range");
  Belief b;
  b.log_probs_.assign(n, kNegInf);
  b.log_probs_[s] = 0.0;
  return b;
}

Belief Belief::FromProbabilities(std::span<const double> probs) {
  std::vector<double> logs(probs.size());
  for (std::size_t s = 0; s < probs.size(); ++s) {
    if (!(probs[s] >= 0.0)) throw BeliefplayError("negative probability");
    logs[s] = probs[s] > 0.0 ? std::log(probs[s]) : kNegInf;
  }
  return FromLogWeights(logs);
}

Belief Belief::FromLogWeights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw BeliefplayError("empty belief");
  for (double v : log_weights) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw BeliefplayError("invalid log weight");
    }
  }
  const double lse = LogSumExp(log_weights);
  if (lse == kNegInf) throw BeliefplayError("degenerate belief");
  Belief b;
  b.log_probs_.resize(log_weights.size());
  for (std::size_t s = 0; s < log_weights.size(); ++s) {
    b.log_probs_[s] = log_weights[s] - lse;
  }
  return b;
}

double Belief::prob(std::size_t s) const { return std::exp(log_probs_.at(s)); }

std::vector<double> Belief::Probabilities() const {
  std::vector<double> p(log_probs_.size());
  for (std::size_t s = 0; s < p.size(); ++s) p[s] = std::exp(log_probs_[s]);
  return p;
}

std::vector<std::size_t> Belief::Support(double tol) const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < log_probs_.size(); ++s) {
    if (std::exp(log_probs_[s]) > tol) out.push_back(s);
  }
  return out;
}

double Belief::Expect(std::span<const double> values) const {
  if (values.size() != log_probs_.size()) {
    throw BeliefplayError("size mismatch in belief expectation");
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (log_probs_[s] == kNegInf) continue;
    sum += std::exp(log_probs_[s]) * values[s];
  }
  return sum;
}

double BeliefDistance(const Belief& a, const Belief& b) {
  if (a.size() != b.size()) throw BeliefplayError("belief size mismatch");
  double d = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    d = std::max(d, std::abs(a.prob(s) - b.prob(s)));
  }
  return d;
}

StrategyProfile StrategyProfile::Scalars(std::initializer_list<double> values) {
  return Scalars(std::span<const double>(values.begin(), values.size()));
}

StrategyProfile StrategyProfile::Scalars(std::span<const double> values) {
  StrategyProfile q;
  for (double v : values) q.players.push_back({v});
  return q;
}

std::vector<double> StrategyProfile::Flatten() const {
  std::vector<double> out;
  for (const auto& p : players) out.insert(out.end(), p.begin(), p.end());
  return out;
}

double ProfileDistance(const StrategyProfile& a, const StrategyProfile& b) {
  if (a.players.size() != b.players.size()) {
    throw BeliefplayError("profile shape mismatch");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.players.size(); ++i) {
    if (a.players[i].size() != b.players[i].size()) {
      throw BeliefplayError("profile shape mismatch");
    }
    for (std::size_t k = 0; k < a.players[i].size(); ++k) {
      d = std::max(d, std::abs(a.players[i][k] - b.players[i][k]));
    }
  }
  return d;
}

StrategySpace StrategySpace::Intervals(
    std::span<const std::pair<double, double>> b) {
  StrategySpace space;
  for (const auto& [lo, hi] : b) {
    if (!(lo <= hi)) throw BeliefplayError("empty strategy interval");
    space.players_.push_back({Kind::kBox, {lo}, {hi}});
  }
  return space;
}

StrategySpace StrategySpace::Intervals(
    std::initializer_list<std::pair<double, double>> b) {
  return Intervals(
      std::span<const std::pair<double, double>>(b.begin(), b.size()));
}

StrategySpace StrategySpace::Simplices(std::span<const std::size_t> dims) {
  StrategySpace space;
  for (std::size_t d : dims) {
    if (d == 0) throw BeliefplayError("empty simplex");
    space.players_.push_back({Kind::kSimplex, std::vector<double>(d, 0.0),
                              std::vector<double>(d, 1.0)});
  }
  return space;
}

bool StrategySpace::SameShape(const StrategyProfile& q) const {
  if (q.players.size() != players_.size()) return false;
  for (std::size_t i = 0; i < players_.size(); ++i) {
    if (q.players[i].size() != players_[i].dim()) return false;
  }
  return true;
}

bool StrategySpace::Contains(const StrategyProfile& q, double tol) const {
  if (!SameShape(q)) return false;
  for (std::size_t i = 0; i < players_.size(); ++i) {
    const PlayerSpace& p = players_[i];
    double sum = 0.0;
    for (std::size_t k = 0; k < p.dim(); ++k) {
      const double x = q.players[i][k];
      if (!(x >= p.lower[k] - tol && x <= p.upper[k] + tol)) return false;
      sum += x;
    }
    if (p.kind == Kind::kSimplex && std::abs(sum - 1.0) > tol * p.dim()) {
      return false;
    }
  }
  return true;
}

StrategyProfile StrategySpace::Sample(Rng& rng) const {
  StrategyProfile q;
  for (const PlayerSpace& p : players_) {
    PlayerStrategy x(p.dim());
    if (p.kind == Kind::kBox) {
      for (std::size_t k = 0; k < p.dim(); ++k) {
        x[k] = p.lower[k] + (p.upper[k] - p.lower[k]) * Uniform01(rng);
      }
    } else {
      double sum = 0.0;
      for (double& v : x) {
        v = -std::log(1.0 - Uniform01(rng));
        sum += v;
      }
      for (double& v : x) v /= sum;
    }
    q.players.push_back(std::move(x));
  }
  return q;
}

std::vector<double> ProjectToSimplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - tau, 0.0);
  return out;
}

StrategyProfile ProjectStrategy(const StrategySpace& space,
                                const StrategyProfile& q) {
  if (!space.SameShape(q)) throw BeliefplayError("profile shape mismatch");
  StrategyProfile out = q;
  for (std::size_t i = 0; i < space.num_players(); ++i) {
    const auto& p = space.player(i);
    if (p.kind == StrategySpace::Kind::kBox) {
      for (std::size_t k = 0; k < p.dim(); ++k) {
        out.players[i][k] = std::clamp(q.players[i][k], p.lower[k], p.upper[k]);
      }
    } else {
      out.players[i] = ProjectToSimplex(q.players[i]);
    }
  }
  return out;
}

BestResponseSet BestResponseSet::Point(std::span<const double> x) {
  BestResponseSet b;
  b.lower.assign(x.begin(), x.end());
  b.upper = b.lower;
  return b;
}

BestResponseSet BestResponseSet::Point(double x) {
  return Interval(x, x);
}

BestResponseSet BestResponseSet::Interval(double lo, double hi) {
  if (lo > hi) throw BeliefplayError("empty best-response interval");
  BestResponseSet b;
  b.lower = {lo};
  b.upper = {hi};
  return b;
}

BestResponseSet BestResponseSet::Face(std::vector<bool> face) {
  if (std::none_of(face.begin(), face.end(), [](bool f) { return f; })) {
    throw BeliefplayError("empty best-response face");
  }
  BestResponseSet b;
  b.kind = StrategySpace::Kind::kSimplex;
  b.face = std::move(face);
  return b;
}

PlayerStrategy BestResponseSet::Selection() const {
  if (kind == StrategySpace::Kind::kBox) {
    PlayerStrategy x(lower.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = lower[k] == upper[k] ? lower[k] : 0.5 * (lower[k] + upper[k]);
    }
    return x;
  }
  const double count =
      static_cast<double>(std::count(face.begin(), face.end(), true));
  PlayerStrategy x(face.size(), 0.0);
  for (std::size_t k = 0; k < face.size(); ++k) {
    if (face[k]) x[k] = 1.0 / count;
  }
  return x;
}

PlayerStrategy BestResponseSet::Nearest(std::span<const double> x) const {
  if (kind == StrategySpace::Kind::kBox) {
    if (x.size() != lower.size()) throw BeliefplayError("dimension mismatch");
    PlayerStrategy y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      y[k] = std::clamp(x[k], lower[k], upper[k]);
    }
    return y;
  }
  if (x.size() != face.size()) throw BeliefplayError("dimension mismatch");
  std::vector<double> sub;
  for (std::size_t k = 0; k < face.size(); ++k) {
    if (face[k]) sub.push_back(x[k]);
  }
  const std::vector<double> projected = ProjectToSimplex(sub);
  PlayerStrategy y(face.size(), 0.0);
  std::size_t j = 0;
  for (std::size_t k = 0; k < face.size(); ++k) {
    if (face[k]) y[k] = projected[j++];
  }
  return y;
}

double BestResponseSet::Distance(std::span<const double> x) const {
  const PlayerStrategy y = Nearest(x);
  double sum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) sum += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(sum);
}

double GaussianLogDensity(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         d * d / (2.0 * variance);
}

std::vector<std::string> GameModel::observation_labels() const {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < observation_dim(); ++k) {
    labels.push_back(std::to_string(k));
  }
  return labels;
}

std::vector<ChannelBranch> GameModel::Branches(const StrategyProfile&) const {
  return {ChannelBranch{}};
}

PayoffObservation GameModel::SampleObservation(const StrategyProfile& q,
                                               Rng& rng) const {
  return SampleObservationFrom(params().true_index(), q, rng);
}

PayoffObservation GameModel::SampleObservationFrom(std::size_t s,
                                                   const StrategyProfile& q,
                                                   Rng& rng) const {
  const std::vector<ChannelBranch> branches = Branches(q);
  std::size_t b = 0;
  if (branches.size() > 1) {
    const double u = Uniform01(rng);
    double cumulative = 0.0;
    b = branches.size() - 1;
    for (std::size_t k = 0; k < branches.size(); ++k) {
      cumulative += branches[k].weight;
      if (u < cumulative) {
        b = k;
        break;
      }
    }
  }
  const std::size_t dim = observation_dim();
  std::vector<double> mean(dim), variance(dim);
  ObservationMoments(s, q, branches[b].actions, mean, variance);
  PayoffObservation obs;
  obs.actions = branches[b].actions;
  obs.values.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    obs.values[k] = mean[k] + std::sqrt(variance[k]) * StandardNormal(rng);
  }
  return obs;
}

double GameModel::LogLikelihood(std::size_t s, const StrategyProfile& q,
                                const PayoffObservation& obs) const {
  const std::size_t dim = observation_dim();
  if (obs.values.size() != dim) {
    throw BeliefplayError("observation dimension mismatch");
  }
  std::vector<double> mean(dim), variance(dim);
  ObservationMoments(s, q, obs.actions, mean, variance);
  double ll = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    ll += GaussianLogDensity(obs.values[k], mean[k], variance[k]);
  }
  return ll;
}

void GameModel::LogLikelihoods(const StrategyProfile& q,
                               const PayoffObservation& obs,
                               std::span<double> out) const {
  const std::size_t dim = observation_dim();
  if (obs.values.size() != dim) {
    throw BeliefplayError("observation dimension mismatch");
  }
  if (out.size() != params().size()) {
    throw BeliefplayError("likelihood buffer size mismatch");
  }
  std::vector<double> mean(dim), variance(dim);
  for (std::size_t s = 0; s < out.size(); ++s) {
    ObservationMoments(s, q, obs.actions, mean, variance);
    double ll = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      ll += GaussianLogDensity(obs.values[k], mean[k], variance[k]);
    }
    out[s] = ll;
  }
}

StrategyProfile GameModel::EquilibriumMap(const Belief&) const {
  throw BeliefplayError("missing equilibrium map for game " + id());
}

std::optional<double> GameModel::EquilibriumLineOffset(const Belief&) const {
  return std::nullopt;
}

BestResponseSet GameModel::BestResponseMap(const Belief&,
                                           const StrategyProfile&,
                                           std::size_t) const {
  throw BeliefplayError("missing best-response map for game " + id());
}

double GameModel::Potential(std::size_t, const StrategyProfile&) const {
  throw BeliefplayError("game " + id() + " has no potential");
}

double GameModel::ExpectedPayoff(const Belief& theta, const StrategyProfile& q,
                                 std::size_t player) const {
  double sum = 0.0;
  for (std::size_t s = 0; s < theta.size(); ++s) {
    const double lp = theta.log_prob(s);
    if (lp == kNegInf) continue;
    sum += std::exp(lp) * MeanPayoff(s, q).at(player);
  }
  return sum;
}

double GameModel::ExpectedPotential(const Belief& theta,
                                    const StrategyProfile& q) const {
  double sum = 0.0;
  for (std::size_t s = 0; s < theta.size(); ++s) {
    const double lp = theta.log_prob(s);
    if (lp == kNegInf) continue;
    sum += std::exp(lp) * Potential(s, q);
  }
  return sum;
}

StrategyProfile GameModel::BestResponseSelection(
    const Belief& theta, const StrategyProfile& q) const {
  StrategyProfile out = q;
  for (std::size_t i = 0; i < num_players(); ++i) {
    out.players[i] = BestResponseMap(theta, q, i).Selection();
  }
  return out;
}

}  // namespace beliefplay
