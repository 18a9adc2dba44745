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

#include "beliefplay/dynamics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beliefplay/games.h"

namespace beliefplay {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckStep(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw BeliefplayError("stepsize outside [0, 1]");
}

}  // namespace

StepsizeSchedule StepsizeSchedule::Constant(double alpha) {
  CheckStep(alpha);
  return StepsizeSchedule("constant(" + std::to_string(alpha) + ")",
                          [alpha](std::size_t, std::size_t) { return alpha; });
}

StepsizeSchedule StepsizeSchedule::Harmonic() {
  return StepsizeSchedule("harmonic", [](std::size_t, std::size_t t) {
    return 1.0 / static_cast<double>(t);
  });
}

StepsizeSchedule StepsizeSchedule::Alternating(std::size_t num_players) {
  if (num_players == 0) throw BeliefplayError("need at least one player");
  return StepsizeSchedule(
      "alternating", [num_players](std::size_t i, std::size_t t) {
        return (t - 1) % num_players == i ? 1.0 : 0.0;
      });
}

StepsizeSchedule StepsizeSchedule::PhaseShiftedHarmonic() {
  return StepsizeSchedule(
      "phase_shifted_harmonic", [](std::size_t i, std::size_t t) {
        if (i == 0 || t % 2 == 0) return 1.0 / static_cast<double>(t);
        return 1.0 / static_cast<double>((t + 1) / 2);
      });
}

StepsizeSchedule StepsizeSchedule::AlternatingHarmonic(std::size_t num_players) {
  if (num_players == 0) throw BeliefplayError("need at least one player");
  return StepsizeSchedule(
      "alternating_harmonic", [num_players](std::size_t i, std::size_t t) {
        const double base = 1.0 / static_cast<double>(t);
        return (t - 1) % num_players == i ? base : 0.5 * base;
      });
}

StepsizeSchedule StepsizeSchedule::Geometric(double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw BeliefplayError("geometric ratio must be in (0, 1)");
  }
  return StepsizeSchedule(
      "geometric(" + std::to_string(ratio) + ")",
      [ratio](std::size_t, std::size_t t) {
        return std::pow(ratio, static_cast<double>(t));
      });
}

StepsizeSchedule StepsizeSchedule::Custom(
    std::vector<std::vector<double>> table) {
  if (table.empty()) throw BeliefplayError("empty stepsize table");
  for (const auto& row : table) {
    if (row.empty()) throw BeliefplayError("empty stepsize table row");
    for (double a : row) CheckStep(a);
  }
  return StepsizeSchedule(
      "custom", [table = std::move(table)](std::size_t i, std::size_t t) {
        const auto& row = table.at(i);
        return row[std::min(t - 1, row.size() - 1)];
      });
}

double StepsizeSchedule::Step(std::size_t player, std::size_t t) const {
  if (t == 0) throw BeliefplayError("stepsizes are indexed from t = 1");
  return rule_(player, t);
}

std::vector<double> StepsizeSchedule::Steps(std::size_t num_players,
                                            std::size_t t) const {
  std::vector<double> a(num_players);
  for (std::size_t i = 0; i < num_players; ++i) a[i] = Step(i, t);
  return a;
}

ScheduleReport ValidateSchedule(const StepsizeSchedule& schedule,
                                std::size_t num_players, std::size_t horizon) {
  if (horizon < 1000) throw BeliefplayError("validation horizon must be >= 1000");
  if (num_players == 0) throw BeliefplayError("need at least one player");
  const std::size_t T = horizon;
  std::vector<std::vector<double>> a(num_players, std::vector<double>(T + 1));
  std::vector<double> abar(T + 1, 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t i = 0; i < num_players; ++i) {
      a[i][t] = schedule.Step(i, t);
      CheckStep(a[i][t]);
      abar[t] = std::max(abar[t], a[i][t]);
    }
  }

  ScheduleReport r;
  r.horizon = T;
  r.a2 = true;
  const std::size_t three_quarters = (3 * T) / 4;
  for (std::size_t i = 0; i < num_players; ++i) {
    for (std::size_t m : {std::size_t{1}, T / 2}) {
      double log_p = 0.0, log_p_quarter = 0.0;
      for (std::size_t t = m; t <= T; ++t) {
        log_p += a[i][t] >= 1.0 ? kNegInf : std::log1p(-a[i][t]);
        if (t == three_quarters) log_p_quarter = log_p;
      }
      const double p = std::exp(log_p);
      r.tail_products.push_back(p);
      if (p < 1e-6) continue;
      const double drop = log_p_quarter - log_p;
      if (p >= 1e-3 && drop < 1e-2) r.a2 = false;
    }
  }

  r.nu = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= T; ++t) {
    if (abar[t] <= 0.0) continue;
    for (std::size_t i = 0; i < num_players; ++i) {
      r.nu = std::min(r.nu, a[i][t] / abar[t]);
    }
  }
  if (std::isinf(r.nu)) r.nu = 0.0;
  r.a3 = r.nu > 0.0;

  for (std::size_t t = 1; t <= T; ++t) r.partial_sum += abar[t];
  for (std::size_t t = T / 2 + 1; t <= T; ++t) r.square_tail += abar[t] * abar[t];
  r.a4_divergent = r.partial_sum >= 0.5 * std::log(static_cast<double>(T));
  r.a4_square_summable = r.square_tail < 1e-3;
  r.a4_monotone = true;
  for (std::size_t t = 1; t < T; ++t) {
    if (abar[t + 1] > abar[t] * (1.0 + 1e-12)) r.a4_monotone = false;
  }
  for (double x : {0.5, 0.9}) {
    for (std::size_t t = 2; t <= T; ++t) {
      const auto k = static_cast<std::size_t>(std::floor(x * static_cast<double>(t)));
      if (k < 1) continue;
      double ratio;
      if (abar[t] > 0.0) {
        ratio = abar[k] / abar[t];
      } else {
        ratio = abar[k] > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
      }
      r.max_ratio = std::max(r.max_ratio, ratio);
    }
  }
  r.a4_ratio_bounded = r.max_ratio < 1e6;
  r.a4 = r.a4_divergent && r.a4_square_summable && r.a4_monotone &&
         r.a4_ratio_bounded;
  return r;
}

DynamicsMode ParseMode(const std::string& name) {
  if (name == "EQ") return {Estimator::kBayes, UpdateRule::kEquilibrium};
  if (name == "BR") return {Estimator::kBayes, UpdateRule::kBestResponse};
  if (name == "MAP-EQ") return {Estimator::kMap, UpdateRule::kEquilibrium};
  if (name == "MAP-BR") return {Estimator::kMap, UpdateRule::kBestResponse};
  if (name == "OLS-EQ") return {Estimator::kOls, UpdateRule::kEquilibrium};
  if (name == "OLS-BR") return {Estimator::kOls, UpdateRule::kBestResponse};
  throw BeliefplayError("unknown dynamics mode: " + name);
}

std::string ModeName(const DynamicsMode& mode) {
  std::string prefix;
  if (mode.estimator == Estimator::kMap) prefix = "MAP-";
  if (mode.estimator == Estimator::kOls) prefix = "OLS-";
  return prefix + (mode.rule == UpdateRule::kEquilibrium ? "EQ" : "BR");
}

double StateDifference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw BeliefplayError("state size mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

bool DetectConvergence(std::span<const std::vector<double>> thetas,
                       std::span<const std::vector<double>> qs,
                       const ConvergenceCriterion& criterion) {
  if (criterion.window < 2) throw BeliefplayError("window must be >= 2");
  if (thetas.size() != qs.size()) throw BeliefplayError("window size mismatch");
  if (thetas.size() < criterion.window) return false;
  const std::size_t start = thetas.size() - criterion.window;
  for (std::size_t k = start + 1; k < thetas.size(); ++k) {
    if (StateDifference(thetas[k], thetas[k - 1]) > criterion.eps_theta ||
        StateDifference(qs[k], qs[k - 1]) > criterion.eps_q) {
      return false;
    }
  }
  return true;
}

ConvergenceTracker::ConvergenceTracker(ConvergenceCriterion criterion)
    : criterion_(criterion) {
  if (criterion_.window < 2) throw BeliefplayError("window must be >= 2");
}

bool ConvergenceTracker::Add(const std::vector<double>& theta,
                             const std::vector<double>& q) {
  if (count_ > 0) {
    const bool small = StateDifference(theta, last_theta_) <= criterion_.eps_theta &&
                       StateDifference(q, last_q_) <= criterion_.eps_q;
    streak_ = small ? streak_ + 1 : 0;
  }
  ++count_;
  last_theta_ = theta;
  last_q_ = q;
  return streak_ + 1 >= criterion_.window;
}

std::vector<double> Trajectory::StateVector(std::size_t k) const {
  const TrajectoryStep& step = steps.at(k);
  if (mode.estimator == Estimator::kBayes) return step.theta.Probabilities();
  return step.estimate;
}

StrategyProfile StepTowards(const StrategySpace& space,
                            const StrategyProfile& q,
                            const StrategyProfile& target,
                            std::span<const double> a) {
  if (a.size() != q.num_players() || target.num_players() != q.num_players()) {
    throw BeliefplayError("stepsize vector does not match players");
  }
  StrategyProfile next = q;
  for (std::size_t i = 0; i < q.num_players(); ++i) {
    CheckStep(a[i]);
    for (std::size_t k = 0; k < q.players[i].size(); ++k) {
      next.players[i][k] =
          (1.0 - a[i]) * q.players[i][k] + a[i] * target.players[i].at(k);
    }
  }
  return ProjectStrategy(space, next);
}

StrategyProfile StepEq(const GameModel& game, const Belief& theta_next,
                       const StrategyProfile& q, std::span<const double> a) {
  if (!game.capabilities().has_equilibrium_map) {
    throw BeliefplayError("missing equilibrium map for game " + game.id());
  }
  return StepTowards(game.space(), q, game.EquilibriumMap(theta_next), a);
}

StrategyProfile StepBr(const GameModel& game, const Belief& theta_next,
                       const StrategyProfile& q, std::span<const double> a) {
  if (!game.capabilities().has_best_response_map) {
    throw BeliefplayError("missing best-response map for game " + game.id());
  }
  return StepTowards(game.space(), q, game.BestResponseSelection(theta_next, q),
                     a);
}

namespace {

std::vector<std::vector<double>> PriorMeanCoefficients(
    const AffineObservationModel& affine, const Belief& theta) {
  std::vector<std::vector<double>> mean;
  for (std::size_t s = 0; s < theta.size(); ++s) {
    const double p = theta.prob(s);
    const auto b = affine.Coefficients(s);
    if (mean.empty()) {
      mean = b;
      for (auto& row : mean) std::fill(row.begin(), row.end(), 0.0);
    }
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[k].size(); ++j) mean[k][j] += p * b[k][j];
    }
  }
  return mean;
}

}  // namespace

Trajectory RunDynamics(const GameModel& game, const DynamicsConfig& config) {
  const Capabilities caps = game.capabilities();
  const DynamicsMode mode = config.mode;
  if (mode.rule == UpdateRule::kEquilibrium && !caps.has_equilibrium_map) {
    throw BeliefplayError("missing equilibrium map for game " + game.id());
  }
  if (mode.rule == UpdateRule::kBestResponse && !caps.has_best_response_map) {
    throw BeliefplayError("missing best-response map for game " + game.id());
  }
  if (!game.space().Contains(config.q1, 1e-9)) {
    throw BeliefplayError("initial strategy outside the strategy space");
  }
  const std::size_t n_params = game.params().size();
  const std::size_t n_players = game.num_players();

  Belief theta = config.theta1;
  if (mode.estimator == Estimator::kBayes || mode.estimator == Estimator::kOls) {
    if (theta.size() == 0 && mode.estimator == Estimator::kOls) {
      theta = Belief::Uniform(n_params);
    }
    if (theta.size() != n_params) {
      throw BeliefplayError("initial belief does not match parameter set");
    }
    if (mode.estimator == Estimator::kBayes) {
      for (double lp : theta.log_probs()) {
        if (lp == kNegInf) {
          throw BeliefplayError("initial belief must be strictly positive");
        }
      }
    }
  }

  const auto* coords = dynamic_cast<const ParameterCoordinates*>(&game);
  const auto* affine = dynamic_cast<const AffineObservationModel*>(&game);
  if (mode.estimator == Estimator::kOls && affine == nullptr) {
    throw BeliefplayError("OLS modes need an affine observation model");
  }

  // Estimator state.
  LikelihoodHistory history(mode.estimator == Estimator::kMap ? n_params : 0);
  if (mode.estimator == Estimator::kMap && !config.prior_log_density.empty() &&
      config.prior_log_density.size() != n_params) {
    throw BeliefplayError("prior does not match parameter set");
  }
  std::size_t map_index = 0;
  auto map_argmax = [&]() {
    const auto& ll = history.log_likelihood();
    std::size_t best = 0;
    double best_value = kNegInf;
    for (std::size_t s = 0; s < n_params; ++s) {
      const double v = (ll.empty() ? 0.0 : ll[s]) +
                       (config.prior_log_density.empty()
                            ? 0.0
                            : config.prior_log_density[s]);
      if (v > best_value) {
        best_value = v;
        best = s;
      }
    }
    return best;
  };
  std::vector<OlsState> ols;
  std::vector<std::vector<double>> coefficients;
  if (mode.estimator == Estimator::kOls) {
    coefficients = config.initial_coefficients
                       ? *config.initial_coefficients
                       : PriorMeanCoefficients(*affine, theta);
    const std::size_t dim = affine->Regressor(config.q1).size();
    for (std::size_t k = 0; k < game.observation_dim(); ++k) ols.emplace_back(dim);
  }
  auto estimate_vector = [&]() -> std::vector<double> {
    if (mode.estimator == Estimator::kMap) {
      if (coords != nullptr) return coords->Coordinates(map_index);
      return {static_cast<double>(map_index)};
    }
    if (mode.estimator == Estimator::kOls) {
      return affine->CoordinatesFromCoefficients(coefficients);
    }
    return {};
  };

  Trajectory traj;
  traj.seed = config.seed;
  traj.game_id = game.id();
  traj.schedule_id = config.schedule.id();
  traj.mode = mode;

  if (mode.estimator == Estimator::kMap) map_index = map_argmax();
  TrajectoryStep first;
  first.t = 1;
  if (mode.estimator == Estimator::kBayes) first.theta = theta;
  first.estimate = estimate_vector();
  first.q = config.q1;
  traj.steps.push_back(std::move(first));

  ConvergenceTracker tracker(config.convergence);
  tracker.Add(traj.StateVector(0), traj.steps[0].q.Flatten());

  Rng rng(config.seed);
  StrategyProfile q = config.q1;
  for (std::size_t t = 1; t <= config.max_steps; ++t) {
    const PayoffObservation obs = game.SampleObservation(q, rng);
    traj.steps.back().obs = obs;

    StrategyProfile target;
    switch (mode.estimator) {
      case Estimator::kBayes: {
        theta = BayesUpdate(theta, game, q, obs);
        target = mode.rule == UpdateRule::kEquilibrium
                     ? game.EquilibriumMap(theta)
                     : game.BestResponseSelection(theta, q);
        break;
      }
      case Estimator::kMap: {
        history.Accumulate(game, q, obs);
        map_index = map_argmax();
        const Belief point = Belief::PointMass(n_params, map_index);
        target = mode.rule == UpdateRule::kEquilibrium
                     ? game.EquilibriumMap(point)
                     : game.BestResponseSelection(point, q);
        break;
      }
      case Estimator::kOls: {
        const std::vector<double> x = affine->Regressor(q);
        for (std::size_t k = 0; k < ols.size(); ++k) ols[k].Update(x, obs.values[k]);
        std::vector<std::vector<double>> fresh;
        for (const OlsState& state : ols) {
          auto est = state.Estimate(config.ols_max_condition);
          if (!est) break;
          fresh.push_back(std::move(*est));
        }
        if (fresh.size() == ols.size()) coefficients = std::move(fresh);
        if (mode.rule == UpdateRule::kEquilibrium) {
          target = affine->EquilibriumFromCoefficients(coefficients);
        } else {
          target = q;
          for (std::size_t i = 0; i < n_players; ++i) {
            target.players[i] =
                affine->BestResponseFromCoefficients(coefficients, q, i)
                    .Selection();
          }
        }
        break;
      }
    }
    q = StepTowards(game.space(), q, target, config.schedule.Steps(n_players, t));

    TrajectoryStep step;
    step.t = t + 1;
    if (mode.estimator == Estimator::kBayes) step.theta = theta;
    step.estimate = estimate_vector();
    step.q = q;
    traj.steps.push_back(std::move(step));

    const std::size_t k = traj.steps.size() - 1;
    // Without early stopping, a later violation clears the earlier hit.
    if (tracker.Add(traj.StateVector(k), q.Flatten())) {
      if (!traj.converged_at) traj.converged_at = t + 1;
      if (config.stop_on_convergence) break;
    } else {
      traj.converged_at.reset();
    }
  }
  traj.verdict = traj.converged_at ? Verdict::kConverged : Verdict::kMaxSteps;
  return traj;
}

BrDiagnostics BrResiduals(const Trajectory& trajectory, const GameModel& game,
                          const Belief& theta_ref) {
  if (trajectory.mode.estimator != Estimator::kBayes) {
    throw BeliefplayError("BR residuals need a Bayesian trajectory");
  }
  BrDiagnostics out;
  for (std::size_t t = 0; t + 1 < trajectory.steps.size(); ++t) {
    const Belief& next = trajectory.steps[t + 1].theta;
    const StrategyProfile& q = trajectory.steps[t].q;
    std::vector<double> xi;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < game.num_players(); ++i) {
      const PlayerStrategy h = game.BestResponseMap(next, q, i).Selection();
      const PlayerStrategy ref = game.BestResponseMap(theta_ref, q, i).Nearest(h);
      for (std::size_t k = 0; k < h.size(); ++k) {
        xi.push_back(h[k] - ref[k]);
        norm2 += xi.back() * xi.back();
      }
    }
    out.residuals.push_back(std::move(xi));
    out.norms.push_back(std::sqrt(norm2));
  }
  return out;
}

}  // namespace beliefplay
