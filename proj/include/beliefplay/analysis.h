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

#ifndef BELIEFPLAY_ANALYSIS_H_
#define BELIEFPLAY_ANALYSIS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beliefplay/belief.h"
#include "beliefplay/dynamics.h"
#include "beliefplay/model.h"

namespace beliefplay {

struct KlValue {
  double value = 0.0;
  bool analytic = true;
  double std_error = 0.0;  // Monte Carlo only
};

// D_KL(phi^{s_true}(.|q) || phi^s(.|q)) in nats, summed over independent
// Gaussian coordinates and averaged over channel branches.
KlValue KlDivergence(const GameModel& game, std::size_t s_true, std::size_t s,
                     const StrategyProfile& q);
// Sample mean of the log-likelihood ratio under phi^{s_true}.
KlValue MonteCarloKl(const GameModel& game, std::size_t s_true, std::size_t s,
                     const StrategyProfile& q, std::size_t n_samples,
                     std::uint64_t seed);

// {s : D_KL(phi^{s*} || phi^s) <= tol} at q, or intersected over a set.
std::vector<std::size_t> PayoffEquivalentSet(const GameModel& game,
                                             const StrategyProfile& q,
                                             double tol = 1e-9);
std::vector<std::size_t> PayoffEquivalentSetOver(
    const GameModel& game, std::span<const StrategyProfile> profiles,
    double tol = 1e-9);

// Gauss-Hermite nodes and weights for the weight exp(-x^2).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature GaussHermite(std::size_t n);

// D_KL(phi^{s*}(.|q) || sum_s theta(s) phi^s(.|q)) by product quadrature.
// This is the expected one-step increase of log theta(s*).
double MixtureKlDivergence(const GameModel& game, const Belief& theta,
                           const StrategyProfile& q, std::size_t nodes = 96);

struct FixedPoint {
  Belief theta;
  StrategyProfile q;
  bool support_subset_of_sstar = false;
  bool q_in_eq = false;
  double max_br_residual = 0.0;
  double tol_kl = 0.0;
  double tol_eq = 0.0;
  std::optional<double> line_offset;

  bool accepted() const { return support_subset_of_sstar && q_in_eq; }
};

FixedPoint CheckFixedPoint(const GameModel& game, const Belief& theta,
                           const StrategyProfile& q, double tol_kl = 1e-9,
                           double tol_eq = 1e-6);

struct FixedPointCluster {
  FixedPoint representative;  // first accepted point of the cluster
  std::size_t members = 0;
};

// Sweeps Delta(S) with the given step, checks (theta, g(theta)) and clusters
// accepted points whose (theta, q) lie within dedup_radius (L-infinity).
std::vector<FixedPointCluster> EnumerateFixedPoints(const GameModel& game,
                                                    double belief_grid_step,
                                                    double dedup_radius = 0.05);

// All points of the simplex grid with spacing 1/divisions.
std::vector<std::vector<double>> SimplexGrid(std::size_t dim,
                                             std::size_t divisions);

struct StabilityThresholds {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;
  // Inputs.
  std::vector<double> theta_bar;
  double eps_hat = 0.0;
  double gamma = 0.0;
  std::size_t n_params = 0;
  std::size_t n_outside_support = 0;
};

StabilityThresholds ComputeStabilityThresholds(const Belief& theta_bar,
                                               double eps_hat, double gamma,
                                               std::size_t n_params,
                                               std::size_t n_outside_support);

// EQ(theta) as a point or, for line families, the feasible segment of
// q2 - q1 = offset.
struct EquilibriumSet {
  StrategyProfile selection;
  std::optional<double> line_offset;
  double q1_lo = 0.0;
  double q1_hi = 0.0;

  double Distance(const StrategyProfile& q) const;
};
EquilibriumSet EquilibriumSetOf(const GameModel& game, const Belief& theta);

struct StabilityReport {
  bool passed = true;
  std::size_t samples_checked = 0;
  std::optional<StrategyProfile> counterexample_q;
  std::optional<Belief> counterexample_theta;
  std::string reason;
};

// Samples N_delta(EQ(theta_bar)) and checks that the support of theta_bar
// stays payoff-equivalent to s*. The BR rule also samples theta within
// eps of theta_bar and checks that h(theta, q) stays within delta.
StabilityReport CheckLocalStabilityConditionB(
    const GameModel& game, const Belief& theta_bar, double delta,
    std::size_t n_samples = 512, UpdateRule rule = UpdateRule::kEquilibrium,
    double eps = 0.0, std::uint64_t seed = 0, double tol_kl = 1e-9);

// True iff every cluster's belief is within tol of theta_star.
bool CheckGlobalStability(std::span<const FixedPointCluster> fixed_points,
                          const Belief& theta_star, double tol = 1e-6);

// Least-squares slope of log theta^t(s) against t after the burn-in.
// Nullopt ("no-decay") when s keeps mass at the end of the run.
std::optional<double> FitConvergenceRate(const Trajectory& trajectory,
                                         std::size_t s,
                                         double burn_in_fraction = 0.5);

struct FlowResult {
  std::vector<double> times;
  std::vector<StrategyProfile> path;
  std::vector<double> potential;  // E_theta[Psi^s], empty without potential
  double terminal_residual = 0.0;  // max_i dist(q_i, BR_i(theta, q_-i))
};

// Explicit Euler for dq/dtau = A (h(theta, q) - q) with projection.
FlowResult BrFlowIntegrate(const GameModel& game, const Belief& theta,
                           const StrategyProfile& q0,
                           std::span<const double> weights, double dt,
                           double horizon);

double MaxBestResponseResidual(const GameModel& game, const Belief& theta,
                               const StrategyProfile& q);

struct CompleteInfoReport {
  bool equivalent = false;
  StabilityReport neighborhood;
  double selection_gap = 0.0;
  std::optional<double> offset_gap;
};

// Condition (b) payoff equivalence near EQ(theta_bar), then
// EQ(theta_bar) == EQ(theta*) within tol.
CompleteInfoReport CheckCompleteInfoEquivalence(
    const GameModel& game, const Belief& theta_bar, double delta,
    double tol = 1e-6, std::size_t n_samples = 512, std::uint64_t seed = 0);

}  // namespace beliefplay

#endif  // BELIEFPLAY_ANALYSIS_H_
