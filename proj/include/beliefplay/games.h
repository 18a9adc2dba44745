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

#ifndef BELIEFPLAY_GAMES_H_
#define BELIEFPLAY_GAMES_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beliefplay/belief.h"
#include "beliefplay/model.h"

namespace beliefplay {

// Games whose observation coordinate k has mean Regressor(q) . b_k. Lets
// least-squares estimators drive the dynamics with a point estimate.
class AffineObservationModel {
 public:
  virtual ~AffineObservationModel() = default;

  virtual std::vector<double> Regressor(const StrategyProfile& q) const = 0;
  // b_k for every observation coordinate under parameter s.
  virtual std::vector<std::vector<double>> Coefficients(
      std::size_t s) const = 0;
  virtual StrategyProfile EquilibriumFromCoefficients(
      const std::vector<std::vector<double>>& b) const;
  virtual BestResponseSet BestResponseFromCoefficients(
      const std::vector<std::vector<double>>& b, const StrategyProfile& q,
      std::size_t player) const;
  // Native parameter coordinates recovered from coefficients.
  virtual std::vector<double> CoordinatesFromCoefficients(
      const std::vector<std::vector<double>>& b) const = 0;
};

// Games with meaningful parameter coordinates (recorded by estimators).
class ParameterCoordinates {
 public:
  virtual ~ParameterCoordinates() = default;
  virtual std::vector<std::string> coordinate_labels() const = 0;
  virtual std::vector<double> Coordinates(std::size_t s) const = 0;
};

// Quantity duopoly with price alpha - beta (q1 + q2) + noise. Observing the
// total quantity and the price is sufficient for both payoffs.
class CournotGame : public GameModel,
                    public AffineObservationModel,
                    public ParameterCoordinates {
 public:
  struct Options {
    std::vector<double> alpha = {2.0, 4.0};
    std::vector<double> beta = {1.0, 3.0};
    std::vector<std::string> labels = {"s1", "s2"};
    std::size_t true_index = 0;
    double noise_variance = 0.5;
    double q_max = 10.0;
  };

  CournotGame() : CournotGame(Options{}) {}
  explicit CournotGame(Options options);
  // Parameter set = grid over (alpha, beta); `truth` must be a grid point.
  static CournotGame OnGrid(const MapGrid& grid, std::span<const double> truth,
                            double noise_variance = 0.5, double q_max = 10.0);

  std::string id() const override { return "cournot"; }
  const StrategySpace& space() const override { return space_; }
  const ParameterSet& params() const override { return params_; }
  Capabilities capabilities() const override;
  std::vector<double> MeanPayoff(std::size_t s,
                                 const StrategyProfile& q) const override;
  std::size_t observation_dim() const override { return 1; }
  std::vector<std::string> observation_labels() const override;
  void ObservationMoments(std::size_t s, const StrategyProfile& q,
                          std::span<const int> actions, std::span<double> mean,
                          std::span<double> variance) const override;
  void LogLikelihoods(const StrategyProfile& q, const PayoffObservation& obs,
                      std::span<double> out) const override;
  StrategyProfile EquilibriumMap(const Belief& theta) const override;
  BestResponseSet BestResponseMap(const Belief& theta,
                                  const StrategyProfile& q,
                                  std::size_t player) const override;
  double Potential(std::size_t s, const StrategyProfile& q) const override;

  std::vector<double> Regressor(const StrategyProfile& q) const override;
  std::vector<std::vector<double>> Coefficients(std::size_t s) const override;
  StrategyProfile EquilibriumFromCoefficients(
      const std::vector<std::vector<double>>& b) const override;
  BestResponseSet BestResponseFromCoefficients(
      const std::vector<std::vector<double>>& b, const StrategyProfile& q,
      std::size_t player) const override;
  std::vector<double> CoordinatesFromCoefficients(
      const std::vector<std::vector<double>>& b) const override;

  std::vector<std::string> coordinate_labels() const override {
    return {"alpha", "beta"};
  }
  std::vector<double> Coordinates(std::size_t s) const override {
    return {alpha_[s], beta_[s]};
  }

  // Payoffs c_i = q_i * price implied by an observation.
  std::vector<double> PayoffsFromObservation(
      const StrategyProfile& q, const PayoffObservation& obs) const;
  // Log density of the realized payoff vector. Both payoffs are driven by
  // the single price shock, so the density is that of c_1 (q_1 > 0).
  double PayoffLogDensity(std::size_t s, const StrategyProfile& q,
                          std::span<const double> payoffs) const;

  double alpha(std::size_t s) const { return alpha_.at(s); }
  double beta(std::size_t s) const { return beta_.at(s); }
  double noise_variance() const { return noise_variance_; }

 private:
  StrategyProfile EquilibriumForMeans(double alpha, double beta) const;
  BestResponseSet BestResponseForMeans(double alpha, double beta,
                                       const StrategyProfile& q,
                                       std::size_t player) const;

  std::vector<double> alpha_;
  std::vector<double> beta_;
  double noise_variance_;
  double q_max_;
  StrategySpace space_;
  ParameterSet params_;
};

// Two players pay a quadratic penalty once |q1 - q2| exceeds an unknown
// safe margin s; player 1 prefers low, player 2 high strategies.
class CoordinationSafeMarginGame : public GameModel {
 public:
  struct Options {
    std::vector<double> margins = {0.0, 0.5, 1.5};
    std::vector<std::string> labels = {"s1", "s2", "s3"};
    std::size_t true_index = 2;
    double noise_variance = 2.0;
    double penalty_weight = 2.0;
    std::pair<double, double> q1_bounds = {0.0, 2.0};
    std::pair<double, double> q2_bounds = {1.0, 4.0};
    // Equilibrium selection: q1 = anchor clamped onto the equilibrium line.
    double anchor = 0.0;
  };

  CoordinationSafeMarginGame() : CoordinationSafeMarginGame(Options{}) {}
  explicit CoordinationSafeMarginGame(Options options);

  std::string id() const override { return "coordination_safe_margin"; }
  const StrategySpace& space() const override { return space_; }
  const ParameterSet& params() const override { return params_; }
  Capabilities capabilities() const override;
  std::vector<double> MeanPayoff(std::size_t s,
                                 const StrategyProfile& q) const override;
  std::size_t observation_dim() const override { return 2; }
  std::vector<std::string> observation_labels() const override;
  void ObservationMoments(std::size_t s, const StrategyProfile& q,
                          std::span<const int> actions, std::span<double> mean,
                          std::span<double> variance) const override;
  StrategyProfile EquilibriumMap(const Belief& theta) const override;
  std::optional<double> EquilibriumLineOffset(
      const Belief& theta) const override;
  BestResponseSet BestResponseMap(const Belief& theta,
                                  const StrategyProfile& q,
                                  std::size_t player) const override;
  double Potential(std::size_t s, const StrategyProfile& q) const override;

  // Offset D solving E_theta[2 w (D - s)_+] = 1.
  double Offset(const Belief& theta) const;
  double Penalty(std::size_t s, double gap) const;
  double margin(std::size_t s) const { return options_.margins.at(s); }

 private:
  Options options_;
  StrategySpace space_;
  ParameterSet params_;
};

// Like the safe-margin game, but the penalty (q1 - q2)^2 steepens with an
// unknown slope s beyond |q1 - q2| = knee. Best responses are computed by
// golden-section search.
class CoordinationIncreasingPenaltyGame : public GameModel {
 public:
  struct Options {
    std::vector<double> penalties = {2.0, 4.0};
    std::vector<std::string> labels = {"s1", "s2"};
    std::size_t true_index = 0;
    double noise_variance = 1.0;
    double knee = 1.0;
    std::pair<double, double> q1_bounds = {0.0, 2.0};
    std::pair<double, double> q2_bounds = {1.0, 4.0};
    double anchor = 0.85;
    double search_tolerance = 1e-10;
  };

  CoordinationIncreasingPenaltyGame()
      : CoordinationIncreasingPenaltyGame(Options{}) {}
  explicit CoordinationIncreasingPenaltyGame(Options options);

  std::string id() const override {
    return "coordination_increasing_penalty";
  }
  const StrategySpace& space() const override { return space_; }
  const ParameterSet& params() const override { return params_; }
  Capabilities capabilities() const override;
  std::vector<double> MeanPayoff(std::size_t s,
                                 const StrategyProfile& q) const override;
  std::size_t observation_dim() const override { return 2; }
  std::vector<std::string> observation_labels() const override;
  void ObservationMoments(std::size_t s, const StrategyProfile& q,
                          std::span<const int> actions, std::span<double> mean,
                          std::span<double> variance) const override;
  StrategyProfile EquilibriumMap(const Belief& theta) const override;
  std::optional<double> EquilibriumLineOffset(
      const Belief& theta) const override;
  BestResponseSet BestResponseMap(const Belief& theta,
                                  const StrategyProfile& q,
                                  std::size_t player) const override;
  double Potential(std::size_t s, const StrategyProfile& q) const override;

  double Offset(const Belief& theta) const;
  double Cost(std::size_t s, double gap) const;

 private:
  double CostSlope(std::size_t s, double distance) const;

  Options options_;
  StrategySpace space_;
  ParameterSet params_;
};

// Public-good game: return r = alpha + q1 + q2 + noise with
// parameter-dependent noise variance, payoff c_i = q_i r - 3 q_i^2.
class PublicGoodGame : public GameModel,
                       public AffineObservationModel,
                       public ParameterCoordinates {
 public:
  struct Options {
    std::vector<double> alpha = {0.0, 1.0, 2.0};
    std::vector<double> variance = {3.0, 5.0, 10.0};
    std::vector<std::string> labels = {"l", "m", "h"};
    std::size_t true_index = 1;
    double q_max = 10.0;
  };

  PublicGoodGame() : PublicGoodGame(Options{}) {}
  explicit PublicGoodGame(Options options);

  std::string id() const override { return "public_good"; }
  const StrategySpace& space() const override { return space_; }
  const ParameterSet& params() const override { return params_; }
  Capabilities capabilities() const override;
  std::vector<double> MeanPayoff(std::size_t s,
                                 const StrategyProfile& q) const override;
  std::size_t observation_dim() const override { return 1; }
  std::vector<std::string> observation_labels() const override;
  void ObservationMoments(std::size_t s, const StrategyProfile& q,
                          std::span<const int> actions, std::span<double> mean,
                          std::span<double> variance) const override;
  StrategyProfile EquilibriumMap(const Belief& theta) const override;
  BestResponseSet BestResponseMap(const Belief& theta,
                                  const StrategyProfile& q,
                                  std::size_t player) const override;

  std::vector<double> Regressor(const StrategyProfile& q) const override;
  std::vector<std::vector<double>> Coefficients(std::size_t s) const override;
  StrategyProfile EquilibriumFromCoefficients(
      const std::vector<std::vector<double>>& b) const override;
  BestResponseSet BestResponseFromCoefficients(
      const std::vector<std::vector<double>>& b, const StrategyProfile& q,
      std::size_t player) const override;
  std::vector<double> CoordinatesFromCoefficients(
      const std::vector<std::vector<double>>& b) const override;

  std::vector<std::string> coordinate_labels() const override {
    return {"alpha"};
  }
  std::vector<double> Coordinates(std::size_t s) const override {
    return {options_.alpha.at(s)};
  }

  std::vector<double> PayoffsFromObservation(
      const StrategyProfile& q, const PayoffObservation& obs) const;
  // Log density of c_1 (q_1 > 0); c_2 is a function of c_1 given q.
  double PayoffLogDensity(std::size_t s, const StrategyProfile& q,
                          std::span<const double> payoffs) const;

 private:
  Options options_;
  StrategySpace space_;
  ParameterSet params_;
};

// Finite two-player game in mixed strategies. The realized pure action
// profile is drawn from q and the payoff vector is Gaussian around the
// parameter's payoff at that profile.
class FiniteMatrixGame : public GameModel {
 public:
  struct Options {
    std::vector<std::size_t> num_actions = {2, 2};
    // means[s][profile][player]; profile = a0 * num_actions[1] + a1.
    std::vector<std::vector<std::vector<double>>> means;
    std::vector<double> noise_variance = {1.0, 1.0};
    std::vector<std::string> labels = {"s1", "s2"};
    std::size_t true_index = 0;
  };

  // Payoffs agree under both parameters except at profile (1, 1).
  static Options DefaultOptions();

  FiniteMatrixGame() : FiniteMatrixGame(DefaultOptions()) {}
  explicit FiniteMatrixGame(Options options);

  std::string id() const override { return "finite_matrix"; }
  const StrategySpace& space() const override { return space_; }
  const ParameterSet& params() const override { return params_; }
  Capabilities capabilities() const override;
  std::vector<double> MeanPayoff(std::size_t s,
                                 const StrategyProfile& q) const override;
  std::size_t observation_dim() const override { return 2; }
  std::vector<std::string> observation_labels() const override;
  void ObservationMoments(std::size_t s, const StrategyProfile& q,
                          std::span<const int> actions, std::span<double> mean,
                          std::span<double> variance) const override;
  std::vector<ChannelBranch> Branches(const StrategyProfile& q) const override;
  PayoffObservation SampleObservationFrom(std::size_t s,
                                          const StrategyProfile& q,
                                          Rng& rng) const override;
  BestResponseSet BestResponseMap(const Belief& theta,
                                  const StrategyProfile& q,
                                  std::size_t player) const override;

  std::size_t ProfileIndex(std::span<const int> actions) const;
  double Mean(std::size_t s, std::span<const int> actions,
              std::size_t player) const;
  double noise_variance(std::size_t player) const {
    return options_.noise_variance.at(player);
  }

 private:
  Options options_;
  StrategySpace space_;
  ParameterSet params_;
};

// Draws one pure action per player from the mixed profile.
std::vector<int> SampleActionProfile(const StrategyProfile& q, Rng& rng);

// Payoff c_i = (q, 1) . s_i + noise for scalar-strategy players. Candidate
// parameters are concatenations of the per-player coefficient vectors.
class AffineGaussianGame : public GameModel,
                           public AffineObservationModel,
                           public ParameterCoordinates {
 public:
  struct Options {
    std::vector<std::pair<double, double>> bounds = {{-2.0, 2.0}};
    std::vector<std::vector<double>> candidates = {{2.0, 1.0}};
    std::vector<std::string> labels;  // defaulted to "g<index>"
    std::size_t true_index = 0;
    double noise_variance = 1.0;
  };

  explicit AffineGaussianGame(Options options);
  static AffineGaussianGame OnGrid(
      const MapGrid& grid, std::span<const double> truth,
      std::vector<std::pair<double, double>> bounds, double noise_variance);

  std::string id() const override { return "affine_gaussian"; }
  const StrategySpace& space() const override { return space_; }
  const ParameterSet& params() const override { return params_; }
  Capabilities capabilities() const override { return {}; }
  std::vector<double> MeanPayoff(std::size_t s,
                                 const StrategyProfile& q) const override;
  std::size_t observation_dim() const override { return space_.num_players(); }
  void ObservationMoments(std::size_t s, const StrategyProfile& q,
                          std::span<const int> actions, std::span<double> mean,
                          std::span<double> variance) const override;
  void LogLikelihoods(const StrategyProfile& q, const PayoffObservation& obs,
                      std::span<double> out) const override;

  std::vector<double> Regressor(const StrategyProfile& q) const override;
  std::vector<std::vector<double>> Coefficients(std::size_t s) const override;
  std::vector<double> CoordinatesFromCoefficients(
      const std::vector<std::vector<double>>& b) const override;
  std::vector<std::string> coordinate_labels() const override;
  std::vector<double> Coordinates(std::size_t s) const override {
    return options_.candidates.at(s);
  }

 private:
  Options options_;
  StrategySpace space_;
  ParameterSet params_;
};

}  // namespace beliefplay

#endif  // BELIEFPLAY_GAMES_H_
