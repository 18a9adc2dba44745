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

#include "beliefplay/analysis.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace beliefplay {
namespace {

double GaussianKl(double mean_p, double var_p, double mean_q, double var_q) {
  const double d = mean_p - mean_q;
  return 0.5 * std::log(var_q / var_p) + (var_p + d * d) / (2.0 * var_q) - 0.5;
}

std::vector<double> Concat(const Belief& theta, const StrategyProfile& q) {
  std::vector<double> v = theta.Probabilities();
  for (double x : q.Flatten()) v.push_back(x);
  return v;
}

// Uniform direction in the tangent space of Q (simplex players keep their
// coordinate sum), scaled to a uniform radius in the delta-ball.
std::vector<double> BallOffset(const StrategySpace& space, double radius,
                               Rng& rng) {
  std::vector<double> dir;
  std::size_t effective_dim = 0;
  for (std::size_t i = 0; i < space.num_players(); ++i) {
    const auto& p = space.player(i);
    std::vector<double> g(p.dim());
    for (double& x : g) x = StandardNormal(rng);
    if (p.kind == StrategySpace::Kind::kSimplex) {
      double mean = 0.0;
      for (double x : g) mean += x;
      mean /= static_cast<double>(g.size());
      for (double& x : g) x -= mean;
      effective_dim += p.dim() - 1;
    } else {
      effective_dim += p.dim();
    }
    dir.insert(dir.end(), g.begin(), g.end());
  }
  double norm = 0.0;
  for (double x : dir) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0 || effective_dim == 0) return std::vector<double>(dir.size(), 0.0);
  const double r =
      radius * std::pow(Uniform01(rng), 1.0 / static_cast<double>(effective_dim));
  for (double& x : dir) x *= r / norm;
  return dir;
}

StrategyProfile Unflatten(const StrategyProfile& shape,
                          std::span<const double> flat) {
  StrategyProfile q = shape;
  std::size_t k = 0;
  for (auto& player : q.players) {
    for (double& x : player) x = flat[k++];
  }
  return q;
}

// Uniform draw from the Euclidean eps-ball around theta inside the simplex.
Belief SampleBeliefNear(const Belief& theta, double eps, Rng& rng) {
  const std::vector<double> center = theta.Probabilities();
  if (eps <= 0.0 || center.size() < 2) return theta;
  const StrategySpace simplex =
      StrategySpace::Simplices(std::vector<std::size_t>{center.size()});
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const std::vector<double> off = BallOffset(simplex, eps, rng);
    std::vector<double> p(center.size());
    bool ok = true;
    for (std::size_t s = 0; s < p.size(); ++s) {
      p[s] = center[s] + off[s];
      if (p[s] < 0.0) ok = false;
    }
    if (ok) return Belief::FromProbabilities(p);
  }
  return theta;
}

}  // namespace

KlValue KlDivergence(const GameModel& game, std::size_t s_true, std::size_t s,
                     const StrategyProfile& q) {
  const std::size_t d = game.observation_dim();
  std::vector<double> m_true(d), v_true(d), m_s(d), v_s(d);
  KlValue out;
  for (const ChannelBranch& b : game.Branches(q)) {
    game.ObservationMoments(s_true, q, b.actions, m_true, v_true);
    game.ObservationMoments(s, q, b.actions, m_s, v_s);
    double kl = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      kl += GaussianKl(m_true[k], v_true[k], m_s[k], v_s[k]);
    }
    out.value += b.weight * kl;
  }
  return out;
}

KlValue MonteCarloKl(const GameModel& game, std::size_t s_true, std::size_t s,
                     const StrategyProfile& q, std::size_t n_samples,
                     std::uint64_t seed) {
  if (n_samples < 2) throw BeliefplayError("need at least two samples");
  Rng rng(seed);
  std::vector<double> ll(game.params().size());
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const PayoffObservation obs = game.SampleObservationFrom(s_true, q, rng);
    game.LogLikelihoods(q, obs, ll);
    const double x = ll[s_true] - ll[s];
    sum += x;
    sum2 += x * x;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
  return {mean, false, std::sqrt(var / n)};
}

std::vector<std::size_t> PayoffEquivalentSet(const GameModel& game,
                                             const StrategyProfile& q,
                                             double tol) {
  if (!(tol > 0.0)) throw BeliefplayError("tolerance must be positive");
  const std::size_t s_star = game.params().true_index();
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < game.params().size(); ++s) {
    if (s == s_star || KlDivergence(game, s_star, s, q).value <= tol) {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<std::size_t> PayoffEquivalentSetOver(
    const GameModel& game, std::span<const StrategyProfile> profiles,
    double tol) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < game.params().size(); ++s) out.push_back(s);
  for (const StrategyProfile& q : profiles) {
    const auto here = PayoffEquivalentSet(game, q, tol);
    std::vector<std::size_t> kept;
    std::set_intersection(out.begin(), out.end(), here.begin(), here.end(),
                          std::back_inserter(kept));
    out = std::move(kept);
  }
  return out;
}

Quadrature GaussHermite(std::size_t n) {
  if (n == 0) throw BeliefplayError("need at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Quadrature out;
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) {
    out.nodes.push_back(eig.eigenvalues()(k));
    const double v = eig.eigenvectors()(0, k);
    out.weights.push_back(sqrt_pi * v * v);
  }
  return out;
}

double MixtureKlDivergence(const GameModel& game, const Belief& theta,
                           const StrategyProfile& q, std::size_t nodes) {
  const std::size_t s_star = game.params().true_index();
  const std::size_t n_params = game.params().size();
  const std::size_t d = game.observation_dim();
  const Quadrature gh = GaussHermite(nodes);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);

  std::vector<double> mean(d), var(d), ll(n_params), joint(n_params);
  std::vector<std::size_t> index(d);
  double total = 0.0;
  for (const ChannelBranch& b : game.Branches(q)) {
    game.ObservationMoments(s_star, q, b.actions, mean, var);
    PayoffObservation obs;
    obs.values.resize(d);
    obs.actions = b.actions;
    double branch = 0.0;
    std::fill(index.begin(), index.end(), 0);
    while (true) {
      double w = 1.0;
      for (std::size_t k = 0; k < d; ++k) {
        obs.values[k] = mean[k] + std::sqrt(2.0 * var[k]) * gh.nodes[index[k]];
        w *= gh.weights[index[k]] * inv_sqrt_pi;
      }
      game.LogLikelihoods(q, obs, ll);
      for (std::size_t s = 0; s < n_params; ++s) {
        joint[s] = theta.log_prob(s) + ll[s];
      }
      branch += w * (ll[s_star] - LogSumExp(joint));
      std::size_t k = 0;
      while (k < d && ++index[k] == nodes) index[k++] = 0;
      if (k == d) break;
    }
    total += b.weight * branch;
  }
  return total;
}

double MaxBestResponseResidual(const GameModel& game, const Belief& theta,
                               const StrategyProfile& q) {
  double worst = 0.0;
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    worst = std::max(worst, game.BestResponseMap(theta, q, i).Distance(q.players[i]));
  }
  return worst;
}

FixedPoint CheckFixedPoint(const GameModel& game, const Belief& theta,
                           const StrategyProfile& q, double tol_kl,
                           double tol_eq) {
  if (theta.size() != game.params().size()) {
    throw BeliefplayError("belief does not match parameter set");
  }
  FixedPoint fp;
  fp.theta = theta;
  fp.q = q;
  fp.tol_kl = tol_kl;
  fp.tol_eq = tol_eq;
  const auto sstar = PayoffEquivalentSet(game, q, tol_kl);
  fp.support_subset_of_sstar = true;
  for (std::size_t s : theta.Support()) {
    if (!std::binary_search(sstar.begin(), sstar.end(), s)) {
      fp.support_subset_of_sstar = false;
    }
  }
  fp.max_br_residual = MaxBestResponseResidual(game, theta, q);
  fp.q_in_eq = fp.max_br_residual <= tol_eq;
  if (game.capabilities().has_equilibrium_map) {
    fp.line_offset = game.EquilibriumLineOffset(theta);
  }
  return fp;
}

std::vector<std::vector<double>> SimplexGrid(std::size_t dim,
                                             std::size_t divisions) {
  if (dim == 0 || divisions == 0) throw BeliefplayError("invalid simplex grid");
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> counts(dim, 0);
  const double n = static_cast<double>(divisions);
  // Enumerate compositions of `divisions` into `dim` parts.
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k,
                                                          std::size_t left) {
    if (k + 1 == dim) {
      counts[k] = left;
      std::vector<double> p(dim);
      for (std::size_t j = 0; j < dim; ++j) p[j] = static_cast<double>(counts[j]) / n;
      out.push_back(std::move(p));
      return;
    }
    for (std::size_t c = left + 1; c-- > 0;) {
      counts[k] = c;
      rec(k + 1, left - c);
    }
  };
  rec(0, divisions);
  return out;
}

std::vector<FixedPointCluster> EnumerateFixedPoints(const GameModel& game,
                                                    double belief_grid_step,
                                                    double dedup_radius) {
  if (!game.capabilities().has_equilibrium_map) {
    throw BeliefplayError("missing equilibrium map for game " + game.id());
  }
  if (!(belief_grid_step > 0.0 && belief_grid_step <= 1.0)) {
    throw BeliefplayError("grid step must be in (0, 1]");
  }
  const auto divisions =
      static_cast<std::size_t>(std::llround(1.0 / belief_grid_step));
  std::vector<FixedPointCluster> clusters;
  std::vector<std::vector<double>> centers;
  for (const auto& p : SimplexGrid(game.params().size(), divisions)) {
    const Belief theta = Belief::FromProbabilities(p);
    const StrategyProfile q = game.EquilibriumMap(theta);
    FixedPoint fp = CheckFixedPoint(game, theta, q);
    if (!fp.accepted()) continue;
    const std::vector<double> v = Concat(theta, q);
    bool merged = false;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (StateDifference(v, centers[c]) <= dedup_radius) {
        ++clusters[c].members;
        merged = true;
        break;
      }
    }
    if (!merged) {
      clusters.push_back({std::move(fp), 1});
      centers.push_back(v);
    }
  }
  return clusters;
}

StabilityThresholds ComputeStabilityThresholds(const Belief& theta_bar,
                                               double eps_hat, double gamma,
                                               std::size_t n_params,
                                               std::size_t n_outside_support) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw BeliefplayError("gamma must be in (0, 1)");
  if (!(eps_hat > 0.0)) throw BeliefplayError("eps_hat must be positive");
  if (n_params == 0 || n_outside_support >= n_params) {
    throw BeliefplayError("invalid parameter counts");
  }
  const auto support = theta_bar.Support();
  if (support.empty()) throw BeliefplayError("empty support");

  const double S = static_cast<double>(n_params);
  const double n = static_cast<double>(n_outside_support);
  const double c = 1.0 - gamma;
  StabilityThresholds r;
  r.theta_bar = theta_bar.Probabilities();
  r.eps_hat = eps_hat;
  r.gamma = gamma;
  r.n_params = n_params;
  r.n_outside_support = n_outside_support;

  r.rho2 = eps_hat / ((n + 1.0) * S);
  r.rho1 = std::numeric_limits<double>::infinity();
  r.rho3 = std::numeric_limits<double>::infinity();
  for (std::size_t s : support) {
    const double t = theta_bar.prob(s);
    r.rho1 = std::min(r.rho1, c * t * eps_hat /
                                  ((c + n) * (n + 1.0) * S + c * eps_hat));
    const double a = (eps_hat - n * S * r.rho2 * t) / (S - n * S * r.rho2);
    const double b = eps_hat / (S + n * (t * S + eps_hat));
    r.rho3 = std::min({r.rho3, a, b, t});
  }
  return r;
}

double EquilibriumSet::Distance(const StrategyProfile& q) const {
  if (!line_offset) {
    const auto a = q.Flatten();
    const auto b = selection.Flatten();
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(d2);
  }
  const double x = q.scalar(0), y = q.scalar(1);
  const double t = std::clamp(0.5 * (x + y - *line_offset), q1_lo, q1_hi);
  return std::hypot(x - t, y - t - *line_offset);
}

EquilibriumSet EquilibriumSetOf(const GameModel& game, const Belief& theta) {
  EquilibriumSet eq;
  eq.selection = game.EquilibriumMap(theta);
  eq.line_offset = game.EquilibriumLineOffset(theta);
  if (eq.line_offset) {
    const auto& p1 = game.space().player(0);
    const auto& p2 = game.space().player(1);
    const double d = *eq.line_offset;
    eq.q1_lo = std::max(p1.lower[0], p2.lower[0] - d);
    eq.q1_hi = std::min(p1.upper[0], p2.upper[0] - d);
    if (eq.q1_lo > eq.q1_hi) eq.q1_lo = eq.q1_hi = eq.selection.scalar(0);
  }
  return eq;
}

StabilityReport CheckLocalStabilityConditionB(
    const GameModel& game, const Belief& theta_bar, double delta,
    std::size_t n_samples, UpdateRule rule, double eps, std::uint64_t seed,
    double tol_kl) {
  if (!(delta > 0.0)) throw BeliefplayError("delta must be positive");
  if (!game.capabilities().has_equilibrium_map) {
    throw BeliefplayError("missing equilibrium map for game " + game.id());
  }
  const EquilibriumSet eq = EquilibriumSetOf(game, theta_bar);
  const std::size_t s_star = game.params().true_index();
  const auto support = theta_bar.Support();
  const StrategySpace& space = game.space();
  Rng rng(seed);

  StabilityReport report;
  for (std::size_t k = 0; k < n_samples; ++k) {
    StrategyProfile q = eq.selection;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      StrategyProfile base = eq.selection;
      if (eq.line_offset) {
        const double t = eq.q1_lo + (eq.q1_hi - eq.q1_lo) * Uniform01(rng);
        base.players[0][0] = t;
        base.players[1][0] = t + *eq.line_offset;
      }
      std::vector<double> flat = base.Flatten();
      const auto off = BallOffset(space, delta, rng);
      for (std::size_t j = 0; j < flat.size(); ++j) flat[j] += off[j];
      StrategyProfile candidate = Unflatten(base, flat);
      if (space.Contains(candidate, 0.0)) {
        q = std::move(candidate);
        break;
      }
    }
    ++report.samples_checked;
    for (std::size_t s : support) {
      if (s == s_star) continue;
      if (KlDivergence(game, s_star, s, q).value > tol_kl) {
        report.passed = false;
        report.counterexample_q = q;
        report.reason = "parameter " + game.params().label(s) +
                        " is not payoff-equivalent near EQ";
        return report;
      }
    }
    if (rule == UpdateRule::kBestResponse) {
      const Belief theta = SampleBeliefNear(theta_bar, eps, rng);
      const StrategyProfile h = game.BestResponseSelection(theta, q);
      if (eq.Distance(h) >= delta) {
        report.passed = false;
        report.counterexample_q = q;
        report.counterexample_theta = theta;
        report.reason = "best response leaves the delta-neighborhood";
        return report;
      }
    }
  }
  return report;
}

bool CheckGlobalStability(std::span<const FixedPointCluster> fixed_points,
                          const Belief& theta_star, double tol) {
  if (fixed_points.empty()) throw BeliefplayError("no fixed points supplied");
  for (const auto& c : fixed_points) {
    if (BeliefDistance(c.representative.theta, theta_star) > tol) return false;
  }
  return true;
}

std::optional<double> FitConvergenceRate(const Trajectory& trajectory,
                                         std::size_t s,
                                         double burn_in_fraction) {
  if (trajectory.mode.estimator != Estimator::kBayes) {
    throw BeliefplayError("rate fitting needs a Bayesian trajectory");
  }
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw BeliefplayError("burn-in fraction must be in [0, 1)");
  }
  if (trajectory.terminal().theta.prob(s) > kSupportTolerance) return std::nullopt;
  const std::size_t n = trajectory.steps.size();
  const auto start = static_cast<std::size_t>(
      std::floor(burn_in_fraction * static_cast<double>(n)));
  if (n < start + 2) throw BeliefplayError("too few steps to fit a rate");
  double sx = 0.0, sy = 0.0;
  const double m = static_cast<double>(n - start);
  for (std::size_t k = start; k < n; ++k) {
    const double y = trajectory.steps[k].theta.log_prob(s);
    if (!std::isfinite(y)) throw BeliefplayError("belief hit zero in the fit window");
    sx += static_cast<double>(trajectory.steps[k].t);
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = start; k < n; ++k) {
    const double dx = static_cast<double>(trajectory.steps[k].t) - mx;
    sxy += dx * (trajectory.steps[k].theta.log_prob(s) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

FlowResult BrFlowIntegrate(const GameModel& game, const Belief& theta,
                           const StrategyProfile& q0,
                           std::span<const double> weights, double dt,
                           double horizon) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) {
    throw BeliefplayError("dt must be positive and horizon nonnegative");
  }
  if (weights.size() != game.num_players()) {
    throw BeliefplayError("one weight per player required");
  }
  for (double w : weights) {
    if (!(w > 0.0 && w <= 1.0)) throw BeliefplayError("weights must be in (0, 1]");
  }
  if (!game.space().Contains(q0, 1e-9)) {
    throw BeliefplayError("initial strategy outside the strategy space");
  }
  const bool potential = game.capabilities().has_potential;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> a(weights.begin(), weights.end());
  for (double& x : a) x *= dt;

  FlowResult out;
  StrategyProfile q = q0;
  out.times.push_back(0.0);
  out.path.push_back(q);
  if (potential) out.potential.push_back(game.ExpectedPotential(theta, q));
  for (std::size_t k = 1; k <= steps; ++k) {
    q = StepTowards(game.space(), q, game.BestResponseSelection(theta, q), a);
    out.times.push_back(static_cast<double>(k) * dt);
    out.path.push_back(q);
    if (potential) out.potential.push_back(game.ExpectedPotential(theta, q));
  }
  out.terminal_residual = MaxBestResponseResidual(game, theta, q);
  return out;
}

CompleteInfoReport CheckCompleteInfoEquivalence(const GameModel& game,
                                                const Belief& theta_bar,
                                                double delta, double tol,
                                                std::size_t n_samples,
                                                std::uint64_t seed) {
  if (!game.capabilities().payoff_concave_in_own_strategy) {
    throw BeliefplayError("payoff concavity flag absent for game " + game.id());
  }
  CompleteInfoReport out;
  out.neighborhood = CheckLocalStabilityConditionB(
      game, theta_bar, delta, n_samples, UpdateRule::kEquilibrium, 0.0, seed);
  if (!out.neighborhood.passed) return out;
  const Belief theta_star =
      Belief::PointMass(game.params().size(), game.params().true_index());
  out.selection_gap = ProfileDistance(game.EquilibriumMap(theta_bar),
                                      game.EquilibriumMap(theta_star));
  const auto a = game.EquilibriumLineOffset(theta_bar);
  const auto b = game.EquilibriumLineOffset(theta_star);
  if (a.has_value() != b.has_value()) return out;
  if (a) out.offset_gap = std::abs(*a - *b);
  out.equivalent =
      out.selection_gap <= tol && (!out.offset_gap || *out.offset_gap <= tol);
  return out;
}

}  // namespace beliefplay
