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

#ifndef BELIEFPLAY_BELIEF_H_
#define BELIEFPLAY_BELIEF_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "beliefplay/model.h"

namespace beliefplay {

// Posterior proportional to prior times the likelihood of `obs` at q.
Belief BayesUpdate(const Belief& prior, const GameModel& game,
                   const StrategyProfile& q, const PayoffObservation& obs);
// Same, from precomputed per-parameter log-likelihoods.
Belief BayesUpdateFromLogLikelihoods(const Belief& prior,
                                     std::span<const double> log_likelihoods);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// E[theta'(s) / theta'(s*)] over obs drawn from the true channel at q.
// Samples come from the defensive mixture 0.5 phi^{s*} + 0.5 phi^s and are
// reweighted, which keeps the estimator's variance finite.
MonteCarloEstimate ConditionalRatioExpectation(const GameModel& game,
                                               const Belief& theta,
                                               const StrategyProfile& q,
                                               std::size_t s,
                                               std::size_t n_samples,
                                               std::uint64_t seed);

// E[log theta'(s*)] - log theta(s*) over obs drawn from the true channel.
// Sampled from 0.5 phi^{s*} + 0.5 mu_theta with importance weights.
MonteCarloEstimate TrueLogBeliefDrift(const GameModel& game,
                                      const Belief& theta,
                                      const StrategyProfile& q,
                                      std::size_t n_samples,
                                      std::uint64_t seed);

// Running per-parameter sums of log-likelihoods.
class LikelihoodHistory {
 public:
  explicit LikelihoodHistory(std::size_t num_params)
      : log_likelihood_(num_params, 0.0) {}

  void Accumulate(const GameModel& game, const StrategyProfile& q,
                  const PayoffObservation& obs);
  std::size_t steps() const { return steps_; }
  const std::vector<double>& log_likelihood() const { return log_likelihood_; }

 private:
  std::vector<double> log_likelihood_;
  std::vector<double> scratch_;
  std::size_t steps_ = 0;
};

// Axis-aligned grid in parameter space. Points are enumerated row-major
// (last axis fastest).
struct MapGrid {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> points;

  // Axis step 1/200 of each range.
  static MapGrid Default(std::vector<double> lower, std::vector<double> upper);
  static MapGrid WithSteps(std::vector<double> lower,
                           std::vector<double> upper,
                           std::span<const double> steps);

  std::size_t dim() const { return lower.size(); }
  std::size_t size() const;
  std::vector<double> Point(std::size_t index) const;
  std::vector<double> Steps() const;
  // Index of the point equal to x within `tol` per axis, if any.
  std::optional<std::size_t> Find(std::span<const double> x,
                                  double tol = 1e-12) const;
};

struct MapEstimate {
  std::size_t index = 0;
  std::vector<double> point;
};

// Argmax of prior + cumulative log-likelihood; ties go to the lowest index.
// An empty prior means uniform.
MapEstimate MapEstimateOnGrid(const LikelihoodHistory& history,
                              std::span<const double> prior_log_density,
                              const MapGrid& grid);

// Least squares on accumulated Gram matrix and moment vector.
class OlsState {
 public:
  explicit OlsState(std::size_t dim);

  void Update(std::span<const double> regressor, double response);
  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }
  // Nullopt while the Gram matrix is singular or its condition number is at
  // least `max_condition`.
  std::optional<std::vector<double>> Estimate(
      double max_condition = 1e10) const;

 private:
  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<double> gram_;
  std::vector<double> moment_;
};

// Regressor (q, 1) against one player's realized payoff.
void OlsUpdate(OlsState& state, std::span<const double> q, double payoff);

}  // namespace beliefplay

#endif  // BELIEFPLAY_BELIEF_H_
