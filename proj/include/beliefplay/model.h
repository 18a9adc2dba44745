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

#ifndef BELIEFPLAY_MODEL_H_
#define BELIEFPLAY_MODEL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "beliefplay/random.h"

namespace beliefplay {

// Probabilities at or below this value are outside the support of a belief.
inline constexpr double kSupportTolerance = 1e-9;

class BeliefplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite set of candidate payoff parameters. Labels double as CSV column
// suffixes, so they should not contain commas.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(std::vector<std::string> labels, std::size_t true_index);

  std::size_t size() const { return labels_.size(); }
  std::size_t true_index() const { return true_index_; }
  const std::string& label(std::size_t s) const { return labels_.at(s); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::size_t true_index_ = 0;
};

// A probability distribution over a ParameterSet, stored as log
// probabilities. Always normalized; -inf marks zero mass.
class Belief {
 public:
  Belief() = default;

  static Belief Uniform(std::size_t n);
  static Belief PointMass(std::size_t n, std::size_t s);
  static Belief FromProbabilities(std::span<const double> probs);
  // Normalizes arbitrary log weights; throws on all -inf.
  static Belief FromLogWeights(std::span<const double> log_weights);

  std::size_t size() const { return log_probs_.size(); }
  double log_prob(std::size_t s) const { return log_probs_.at(s); }
  double prob(std::size_t s) const;
  const std::vector<double>& log_probs() const { return log_probs_; }
  std::vector<double> Probabilities() const;
  // Indices with probability above `tol`.
  std::vector<std::size_t> Support(double tol = kSupportTolerance) const;
  // Mass-weighted average of per-parameter values.
  double Expect(std::span<const double> values) const;

 private:
  std::vector<double> log_probs_;
};

// The spec-level normalization primitive: subtracts log-sum-exp.
Belief NormalizeBelief(std::span<const double> log_weights);

double LogSumExp(std::span<const double> x);

// L-infinity distance between probability vectors.
double BeliefDistance(const Belief& a, const Belief& b);

using PlayerStrategy = std::vector<double>;

// One strategy per player. Scalar games use one-element vectors, matrix
// games use mixed strategies on the simplex.
struct StrategyProfile {
  std::vector<PlayerStrategy> players;

  static StrategyProfile Scalars(std::initializer_list<double> values);
  static StrategyProfile Scalars(std::span<const double> values);

  std::size_t num_players() const { return players.size(); }
  double scalar(std::size_t i) const { return players.at(i).at(0); }
  std::vector<double> Flatten() const;
  bool operator==(const StrategyProfile&) const = default;
};

// L-infinity distance between profiles of the same shape.
double ProfileDistance(const StrategyProfile& a, const StrategyProfile& b);

class StrategySpace {
 public:
  enum class Kind { kBox, kSimplex };

  struct PlayerSpace {
    Kind kind = Kind::kBox;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t dim() const { return lower.size(); }
  };

  StrategySpace() = default;
  // One scalar interval per player.
  static StrategySpace Intervals(std::span<const std::pair<double, double>> b);
  static StrategySpace Intervals(
      std::initializer_list<std::pair<double, double>> b);
  // One probability simplex of the given dimension per player.
  static StrategySpace Simplices(std::span<const std::size_t> dims);

  std::size_t num_players() const { return players_.size(); }
  const PlayerSpace& player(std::size_t i) const { return players_.at(i); }
  bool Contains(const StrategyProfile& q, double tol = 1e-12) const;
  bool SameShape(const StrategyProfile& q) const;
  // Uniform draw; simplices use the flat Dirichlet.
  StrategyProfile Sample(Rng& rng) const;

 private:
  std::vector<PlayerSpace> players_;
};

// Euclidean projection onto Q: clamping for boxes, the sort-based
// algorithm for simplices.
StrategyProfile ProjectStrategy(const StrategySpace& space,
                                const StrategyProfile& q);
std::vector<double> ProjectToSimplex(std::span<const double> v);

// A player's (convex) best-response set.
struct BestResponseSet {
  StrategySpace::Kind kind = StrategySpace::Kind::kBox;
  // kBox: coordinatewise interval [lower, upper].
  std::vector<double> lower;
  std::vector<double> upper;
  // kSimplex: actions attaining the maximum; the set is their face.
  std::vector<bool> face;

  static BestResponseSet Point(std::span<const double> x);
  static BestResponseSet Point(double x);
  static BestResponseSet Interval(double lo, double hi);
  static BestResponseSet Face(std::vector<bool> face);

  // Midpoint of the interval, barycenter of the face.
  PlayerStrategy Selection() const;
  PlayerStrategy Nearest(std::span<const double> x) const;
  double Distance(std::span<const double> x) const;
};

// One realized observation. Matrix games also carry the realized action
// profile, which the likelihood conditions on.
struct PayoffObservation {
  std::vector<double> values;
  std::vector<int> actions;
  bool operator==(const PayoffObservation&) const = default;
};

// Channel component: with probability `weight` the observation is drawn
// conditional on `actions` (empty for continuous games).
struct ChannelBranch {
  double weight = 1.0;
  std::vector<int> actions;
};

struct Capabilities {
  bool has_equilibrium_map = false;
  bool has_best_response_map = false;
  bool has_potential = false;
  bool payoff_concave_in_own_strategy = false;
};

double GaussianLogDensity(double x, double mean, double variance);

// A game with Gaussian observation noise. Conditional on a branch the
// observation has independent coordinates with the given moments.
class GameModel {
 public:
  virtual ~GameModel() = default;

  virtual std::string id() const = 0;
  virtual const StrategySpace& space() const = 0;
  virtual const ParameterSet& params() const = 0;
  virtual Capabilities capabilities() const = 0;
  std::size_t num_players() const { return space().num_players(); }

  // Expected payoff vector u^s(q).
  virtual std::vector<double> MeanPayoff(std::size_t s,
                                         const StrategyProfile& q) const = 0;

  virtual std::size_t observation_dim() const = 0;
  virtual std::vector<std::string> observation_labels() const;
  virtual void ObservationMoments(std::size_t s, const StrategyProfile& q,
                                  std::span<const int> actions,
                                  std::span<double> mean,
                                  std::span<double> variance) const = 0;
  virtual std::vector<ChannelBranch> Branches(const StrategyProfile& q) const;

  // Draws from the true parameter's channel at q.
  PayoffObservation SampleObservation(const StrategyProfile& q,
                                      Rng& rng) const;
  // Draws from parameter s's channel at q.
  virtual PayoffObservation SampleObservationFrom(std::size_t s,
                                                  const StrategyProfile& q,
                                                  Rng& rng) const;
  double LogLikelihood(std::size_t s, const StrategyProfile& q,
                       const PayoffObservation& obs) const;
  // All parameters at once; `out` has params().size() entries. Terms that
  // do not depend on s (the action-profile probability) are dropped.
  virtual void LogLikelihoods(const StrategyProfile& q,
                              const PayoffObservation& obs,
                              std::span<double> out) const;

  virtual StrategyProfile EquilibriumMap(const Belief& theta) const;
  // Games whose equilibrium set is the line q2 - q1 = offset report it.
  virtual std::optional<double> EquilibriumLineOffset(
      const Belief& theta) const;
  virtual BestResponseSet BestResponseMap(const Belief& theta,
                                          const StrategyProfile& q,
                                          std::size_t player) const;
  virtual double Potential(std::size_t s, const StrategyProfile& q) const;

  // E_theta[u_i^s(q)].
  double ExpectedPayoff(const Belief& theta, const StrategyProfile& q,
                        std::size_t player) const;
  double ExpectedPotential(const Belief& theta,
                           const StrategyProfile& q) const;
  // The profile formed by every player's best-response selection.
  StrategyProfile BestResponseSelection(const Belief& theta,
                                        const StrategyProfile& q) const;
};

}  // namespace beliefplay

#endif  // BELIEFPLAY_MODEL_H_
