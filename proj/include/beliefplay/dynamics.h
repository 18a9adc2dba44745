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

#ifndef BELIEFPLAY_DYNAMICS_H_
#define BELIEFPLAY_DYNAMICS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beliefplay/belief.h"
#include "beliefplay/model.h"

namespace beliefplay {

// Per-player stepsizes a_i^t in [0, 1], t = 1, 2, ...
class StepsizeSchedule {
 public:
  static StepsizeSchedule Constant(double alpha);
  static StepsizeSchedule Harmonic();
  // Player (t - 1) mod n takes a full step, everyone else stays.
  static StepsizeSchedule Alternating(std::size_t num_players = 2);
  // Player 1: 1/t. Player 2: 1/ceil(t/2) on odd t, 1/t on even t.
  static StepsizeSchedule PhaseShiftedHarmonic();
  // Player (t - 1) mod n gets 1/t, everyone else 1/(2t).
  static StepsizeSchedule AlternatingHarmonic(std::size_t num_players = 2);
  // a^t = ratio^t for every player.
  static StepsizeSchedule Geometric(double ratio);
  // table[player][t - 1]; the last entry repeats past the end.
  static StepsizeSchedule Custom(std::vector<std::vector<double>> table);

  double Step(std::size_t player, std::size_t t) const;
  std::vector<double> Steps(std::size_t num_players, std::size_t t) const;
  const std::string& id() const { return id_; }

 private:
  StepsizeSchedule(std::string id,
                   std::function<double(std::size_t, std::size_t)> rule)
      : id_(std::move(id)), rule_(std::move(rule)) {}

  std::string id_;
  std::function<double(std::size_t, std::size_t)> rule_;
};

struct ScheduleReport {
  std::size_t horizon = 0;
  // A2 surrogate.
  bool a2 = false;
  std::vector<double> tail_products;  // per player, from m = 1 and m = T/2
  // A3: nu = inf_t min_i a_i^t / abar^t over steps with abar^t > 0.
  double nu = 0.0;
  bool a3 = false;
  // A4 surrogate.
  double partial_sum = 0.0;
  double square_tail = 0.0;
  double max_ratio = 0.0;
  bool a4_divergent = false;
  bool a4_square_summable = false;
  bool a4_monotone = false;
  bool a4_ratio_bounded = false;
  bool a4 = false;
};

ScheduleReport ValidateSchedule(const StepsizeSchedule& schedule,
                                std::size_t num_players,
                                std::size_t horizon = 10000);

enum class UpdateRule { kEquilibrium, kBestResponse };
enum class Estimator { kBayes, kMap, kOls };

struct DynamicsMode {
  Estimator estimator = Estimator::kBayes;
  UpdateRule rule = UpdateRule::kEquilibrium;
  bool operator==(const DynamicsMode&) const = default;
};

// "EQ", "BR", "MAP-EQ", "MAP-BR", "OLS-EQ", "OLS-BR".
DynamicsMode ParseMode(const std::string& name);
std::string ModeName(const DynamicsMode& mode);

struct ConvergenceCriterion {
  // Number of trailing states inspected (W - 1 consecutive differences).
  std::size_t window = 50;
  double eps_theta = 1e-6;
  double eps_q = 1e-6;
};

// L-infinity difference of consecutive state vectors.
double StateDifference(std::span<const double> a, std::span<const double> b);

// True when the last `window` states all differ by at most the thresholds.
bool DetectConvergence(std::span<const std::vector<double>> thetas,
                       std::span<const std::vector<double>> qs,
                       const ConvergenceCriterion& criterion);

// Streaming form used by the run loop and by trajectory re-ingestion.
class ConvergenceTracker {
 public:
  explicit ConvergenceTracker(ConvergenceCriterion criterion);
  // Returns true once the criterion holds at the newest state.
  bool Add(const std::vector<double>& theta, const std::vector<double>& q);

 private:
  ConvergenceCriterion criterion_;
  std::vector<double> last_theta_;
  std::vector<double> last_q_;
  std::size_t count_ = 0;
  std::size_t streak_ = 0;
};

struct TrajectoryStep {
  std::size_t t = 1;
  Belief theta;                   // Bayesian modes
  std::vector<double> estimate;   // MAP and OLS modes
  StrategyProfile q;
  std::optional<PayoffObservation> obs;  // drawn at q; absent at the end
};

enum class Verdict { kConverged, kMaxSteps };

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  std::uint64_t seed = 0;
  std::string game_id;
  std::string schedule_id;
  DynamicsMode mode;
  Verdict verdict = Verdict::kMaxSteps;
  // Step at which the window criterion first held and kept holding.
  std::optional<std::size_t> converged_at;

  const TrajectoryStep& terminal() const { return steps.back(); }
  // Recorded information state: probabilities or the point estimate.
  std::vector<double> StateVector(std::size_t k) const;
};

struct DynamicsConfig {
  DynamicsMode mode;
  Belief theta1;       // Bayesian modes; must be strictly positive
  StrategyProfile q1;
  StepsizeSchedule schedule = StepsizeSchedule::Constant(1.0);
  std::size_t max_steps = 2000;
  ConvergenceCriterion convergence;
  bool stop_on_convergence = true;
  std::uint64_t seed = 0;
  // MAP: log prior over parameters; empty means uniform.
  std::vector<double> prior_log_density;
  // OLS: coefficients used until the estimate exists. Defaults to the
  // theta1-weighted mean of each parameter's coefficients.
  std::optional<std::vector<std::vector<double>>> initial_coefficients;
  double ols_max_condition = 1e10;
};

// q' = proj((1 - a) q + a target), per player.
StrategyProfile StepTowards(const StrategySpace& space,
                            const StrategyProfile& q,
                            const StrategyProfile& target,
                            std::span<const double> a);
StrategyProfile StepEq(const GameModel& game, const Belief& theta_next,
                       const StrategyProfile& q, std::span<const double> a);
StrategyProfile StepBr(const GameModel& game, const Belief& theta_next,
                       const StrategyProfile& q, std::span<const double> a);

Trajectory RunDynamics(const GameModel& game, const DynamicsConfig& config);

struct BrDiagnostics {
  // xi^t for t = 1 .. T-1, flattened over players.
  std::vector<std::vector<double>> residuals;
  std::vector<double> norms;  // Euclidean
};

// xi_i^t = h_i(theta^{t+1}, q_-i^t) minus the nearest point of
// BR_i(theta_ref, q_-i^t).
BrDiagnostics BrResiduals(const Trajectory& trajectory, const GameModel& game,
                          const Belief& theta_ref);

}  // namespace beliefplay

#endif  // BELIEFPLAY_DYNAMICS_H_
