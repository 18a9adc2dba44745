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

#include "beliefplay/belief.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace beliefplay {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Welford accumulator.
class RunningMoments {
 public:
  void Add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  MonteCarloEstimate Result() const {
    MonteCarloEstimate e;
    e.mean = mean_;
    e.samples = n_;
    if (n_ > 1) {
      e.std_error = std::sqrt(m2_ / static_cast<double>(n_ - 1) /
                              static_cast<double>(n_));
    }
    return e;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// log(1 + e^x) without overflow.
double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::size_t SampleBranch(const std::vector<ChannelBranch>& branches, Rng& rng) {
  if (branches.size() == 1) return 0;
  const double u = Uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    cumulative += branches[k].weight;
    if (u < cumulative) return k;
  }
  return branches.size() - 1;
}

double LogDensity(std::span<const double> x, std::span<const double> mean,
                  std::span<const double> variance) {
  double ll = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    ll += GaussianLogDensity(x[k], mean[k], variance[k]);
  }
  return ll;
}

void CheckSampling(const GameModel& game, const Belief& theta,
                   std::size_t n_samples) {
  if (n_samples == 0) throw BeliefplayError("n_samples must be positive");
  if (theta.size() != game.params().size()) {
    throw BeliefplayError("belief size does not match parameter set");
  }
  if (theta.log_prob(game.params().true_index()) == kNegInf) {
    throw BeliefplayError("true parameter outside belief support");
  }
}

}  // namespace

Belief BayesUpdateFromLogLikelihoods(const Belief& prior,
                                     std::span<const double> log_likelihoods) {
  if (log_likelihoods.size() != prior.size()) {
    throw BeliefplayError("likelihood size does not match belief");
  }
  std::vector<double> post(prior.size());
  bool any = false;
  for (std::size_t s = 0; s < post.size(); ++s) {
    const double lp = prior.log_prob(s);
    post[s] = lp == kNegInf ? kNegInf : lp + log_likelihoods[s];
    if (std::isnan(post[s])) throw BeliefplayError("invalid likelihood");
    if (post[s] != kNegInf) any = true;
  }
  if (!any) throw BeliefplayError("zero total likelihood");
  return Belief::FromLogWeights(post);
}

Belief BayesUpdate(const Belief& prior, const GameModel& game,
                   const StrategyProfile& q, const PayoffObservation& obs) {
  if (prior.size() != game.params().size()) {
    throw BeliefplayError("belief size does not match parameter set");
  }
  std::vector<double> ll(prior.size());
  game.LogLikelihoods(q, obs, ll);
  return BayesUpdateFromLogLikelihoods(prior, ll);
}

MonteCarloEstimate ConditionalRatioExpectation(const GameModel& game,
                                               const Belief& theta,
                                               const StrategyProfile& q,
                                               std::size_t s,
                                               std::size_t n_samples,
                                               std::uint64_t seed) {
  CheckSampling(game, theta, n_samples);
  const std::size_t s_true = game.params().true_index();
  if (s >= theta.size()) throw BeliefplayError("parameter index out of range");
  MonteCarloEstimate exact;
  exact.samples = n_samples;
  if (s == s_true) {
    exact.mean = 1.0;
    return exact;
  }
  if (theta.log_prob(s) == kNegInf) return exact;  // ratio is identically 0

  Rng rng(seed);
  const std::size_t dim = game.observation_dim();
  std::vector<double> mean_true(dim), var_true(dim), mean_s(dim), var_s(dim);
  const std::vector<ChannelBranch> branches = game.Branches(q);
  RunningMoments moments;
  PayoffObservation obs;
  obs.values.resize(dim);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const ChannelBranch& branch = branches[SampleBranch(branches, rng)];
    game.ObservationMoments(s_true, q, branch.actions, mean_true, var_true);
    game.ObservationMoments(s, q, branch.actions, mean_s, var_s);
    const bool from_true = Uniform01(rng) < 0.5;
    const auto& m = from_true ? mean_true : mean_s;
    const auto& v = from_true ? var_true : var_s;
    for (std::size_t k = 0; k < dim; ++k) {
      obs.values[k] = m[k] + std::sqrt(v[k]) * StandardNormal(rng);
    }
    obs.actions = branch.actions;
    // Importance weight phi^{s*} / proposal = 2 / (1 + phi^s / phi^{s*}).
    const double log_lr = LogDensity(obs.values, mean_s, var_s) -
                          LogDensity(obs.values, mean_true, var_true);
    const double log_weight =
        log_lr == 0.0 ? 0.0 : std::numbers::ln2 - Softplus(log_lr);
    const Belief post = BayesUpdate(theta, game, q, obs);
    const double log_ratio = post.log_prob(s) - post.log_prob(s_true);
    moments.Add(std::exp(log_ratio + log_weight));
  }
  return moments.Result();
}

MonteCarloEstimate TrueLogBeliefDrift(const GameModel& game,
                                      const Belief& theta,
                                      const StrategyProfile& q,
                                      std::size_t n_samples,
                                      std::uint64_t seed) {
  CheckSampling(game, theta, n_samples);
  const std::size_t s_true = game.params().true_index();
  Rng rng(seed);
  const std::size_t dim = game.observation_dim();
  std::vector<double> mean(dim), var(dim);
  const std::vector<ChannelBranch> branches = game.Branches(q);
  RunningMoments moments;
  PayoffObservation obs;
  obs.values.resize(dim);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const ChannelBranch& branch = branches[SampleBranch(branches, rng)];
    // Half the draws come from the belief mixture so that observations the
    // other channels favor are reached even when they are rare under s*.
    std::size_t source = s_true;
    if (Uniform01(rng) >= 0.5) {
      const double u = Uniform01(rng);
      double cumulative = 0.0;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta.prob(k) == 0.0) continue;
        source = k;
        cumulative += theta.prob(k);
        if (u < cumulative) break;
      }
    }
    game.ObservationMoments(source, q, branch.actions, mean, var);
    for (std::size_t k = 0; k < dim; ++k) {
      obs.values[k] = mean[k] + std::sqrt(var[k]) * StandardNormal(rng);
    }
    obs.actions = branch.actions;
    const Belief post = BayesUpdate(theta, game, q, obs);
    // f = log(phi^{s*} / mu_theta); the weight phi^{s*} / proposal is
    // 2 / (1 + e^{-f}).
    const double f = post.log_prob(s_true) - theta.log_prob(s_true);
    const double weight = std::exp(std::numbers::ln2 - Softplus(-f));
    moments.Add(weight * f);
  }
  return moments.Result();
}

void LikelihoodHistory::Accumulate(const GameModel& game,
                                   const StrategyProfile& q,
                                   const PayoffObservation& obs) {
  if (game.params().size() != log_likelihood_.size()) {
    throw BeliefplayError("history size does not match parameter set");
  }
  scratch_.resize(log_likelihood_.size());
  game.LogLikelihoods(q, obs, scratch_);
  for (std::size_t s = 0; s < scratch_.size(); ++s) {
    log_likelihood_[s] += scratch_[s];
  }
  ++steps_;
}

MapGrid MapGrid::Default(std::vector<double> lower, std::vector<double> upper) {
  MapGrid grid;
  if (lower.size() != upper.size()) throw BeliefplayError("grid bounds mismatch");
  grid.lower = std::move(lower);
  grid.upper = std::move(upper);
  grid.points.assign(grid.lower.size(), 201);
  for (std::size_t k = 0; k < grid.lower.size(); ++k) {
    if (grid.lower[k] == grid.upper[k]) grid.points[k] = 1;
  }
  return grid;
}

MapGrid MapGrid::WithSteps(std::vector<double> lower, std::vector<double> upper,
                           std::span<const double> steps) {
  if (lower.size() != upper.size() || steps.size() != lower.size()) {
    throw BeliefplayError("grid bounds mismatch");
  }
  MapGrid grid;
  grid.lower = std::move(lower);
  grid.upper = std::move(upper);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const double range = grid.upper[k] - grid.lower[k];
    if (range < 0.0) throw BeliefplayError("empty grid axis");
    if (range == 0.0) {
      grid.points.push_back(1);
      continue;
    }
    if (!(steps[k] > 0.0)) throw BeliefplayError("grid step must be positive");
    grid.points.push_back(
        static_cast<std::size_t>(std::llround(range / steps[k])) + 1);
  }
  return grid;
}

std::size_t MapGrid::size() const {
  if (points.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t p : points) n *= p;
  return n;
}

std::vector<double> MapGrid::Steps() const {
  std::vector<double> steps(dim(), 0.0);
  for (std::size_t k = 0; k < dim(); ++k) {
    if (points[k] > 1) {
      steps[k] = (upper[k] - lower[k]) / static_cast<double>(points[k] - 1);
    }
  }
  return steps;
}

std::vector<double> MapGrid::Point(std::size_t index) const {
  if (index >= size()) throw BeliefplayError("grid index out of range");
  std::vector<double> x(dim());
  for (std::size_t k = dim(); k-- > 0;) {
    const std::size_t i = index % points[k];
    index /= points[k];
    x[k] = points[k] == 1
               ? lower[k]
               : lower[k] + (upper[k] - lower[k]) * static_cast<double>(i) /
                                static_cast<double>(points[k] - 1);
  }
  return x;
}

std::optional<std::size_t> MapGrid::Find(std::span<const double> x,
                                         double tol) const {
  if (x.size() != dim() || size() == 0) return std::nullopt;
  std::size_t index = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    std::size_t i = 0;
    if (points[k] > 1) {
      const double t = (x[k] - lower[k]) / (upper[k] - lower[k]) *
                       static_cast<double>(points[k] - 1);
      const long long r = std::llround(t);
      if (r < 0 || r >= static_cast<long long>(points[k])) return std::nullopt;
      i = static_cast<std::size_t>(r);
    }
    index = index * points[k] + i;
  }
  const std::vector<double> p = Point(index);
  for (std::size_t k = 0; k < dim(); ++k) {
    if (std::abs(p[k] - x[k]) > tol) return std::nullopt;
  }
  return index;
}

MapEstimate MapEstimateOnGrid(const LikelihoodHistory& history,
                              std::span<const double> prior_log_density,
                              const MapGrid& grid) {
  const std::size_t n = grid.size();
  if (n == 0) throw BeliefplayError("empty grid");
  const auto& ll = history.log_likelihood();
  if (ll.size() != n) throw BeliefplayError("history does not match grid");
  if (!prior_log_density.empty() && prior_log_density.size() != n) {
    throw BeliefplayError("prior does not match grid");
  }
  std::size_t best = 0;
  double best_value = kNegInf;
  for (std::size_t k = 0; k < n; ++k) {
    const double v =
        ll[k] + (prior_log_density.empty() ? 0.0 : prior_log_density[k]);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  if (best_value == kNegInf) throw BeliefplayError("zero posterior on grid");
  return {best, grid.Point(best)};
}

OlsState::OlsState(std::size_t dim)
    : dim_(dim), gram_(dim * dim, 0.0), moment_(dim, 0.0) {
  if (dim == 0) throw BeliefplayError("OLS dimension must be positive");
}

void OlsState::Update(std::span<const double> regressor, double response) {
  if (regressor.size() != dim_) throw BeliefplayError("regressor size mismatch");
  for (std::size_t a = 0; a < dim_; ++a) {
    for (std::size_t b = 0; b < dim_; ++b) {
      gram_[a * dim_ + b] += regressor[a] * regressor[b];
    }
    moment_[a] += regressor[a] * response;
  }
  ++count_;
}

std::optional<std::vector<double>> OlsState::Estimate(
    double max_condition) const {
  const Eigen::Index d = static_cast<Eigen::Index>(dim_);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      gram(gram_.data(), d, d);
  const Eigen::Map<const Eigen::VectorXd> moment(moment_.data(), d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= max_condition) return std::nullopt;
  const Eigen::VectorXd solution = gram.ldlt().solve(moment);
  return std::vector<double>(solution.data(), solution.data() + d);
}

void OlsUpdate(OlsState& state, std::span<const double> q, double payoff) {
  std::vector<double> x(q.begin(), q.end());
  x.push_back(1.0);
  state.Update(x, payoff);
}

}  // namespace beliefplay
