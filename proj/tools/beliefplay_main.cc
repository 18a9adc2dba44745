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

// Command-line front end: `beliefplay simulate` and `beliefplay analyze`.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "beliefplay/analysis.h"
#include "beliefplay/belief.h"
#include "beliefplay/experiment.h"
#include "beliefplay/games.h"

namespace bp = beliefplay;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;

struct GameArgs {
  std::string id = "cournot";
  std::string overrides = "{}";
  std::string out;  // report path; stdout when empty
};

void AddGameArgs(CLI::App* cmd, GameArgs& args) {
  cmd->add_option("--game", args.id, "Game id")->capture_default_str();
  cmd->add_option("--overrides", args.overrides,
                  "JSON object of game constant overrides");
  cmd->add_option("--out", args.out, "Report path (default: stdout)");
}

std::unique_ptr<bp::GameModel> BuildGame(const GameArgs& args) {
  bp::Json overrides;
  try {
    overrides = bp::Json::parse(args.overrides);
  } catch (const bp::Json::exception& e) {
    throw bp::ConfigError(std::string("--overrides is not valid JSON: ") + e.what());
  }
  return bp::MakeGame(args.id, overrides);
}

bp::Belief BeliefArg(const bp::GameModel& game, const std::vector<double>& p) {
  if (p.empty()) return bp::Belief::Uniform(game.params().size());
  if (p.size() != game.params().size()) {
    throw bp::ConfigError("--theta needs one entry per parameter");
  }
  double total = 0.0;
  for (double x : p) {
    if (x < 0.0) throw bp::ConfigError("--theta entries must be nonnegative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw bp::ConfigError("--theta must sum to 1");
  return bp::Belief::FromProbabilities(p);
}

bp::StrategyProfile ProfileArg(const bp::GameModel& game,
                               const std::vector<double>& flat) {
  bp::StrategyProfile q = bp::ProfileFromFlat(game.space(), flat);
  if (!game.space().Contains(q, 1e-9)) throw bp::ConfigError("strategy is infeasible");
  return q;
}

void Emit(const GameArgs& args, const bp::Json& report) {
  if (args.out.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw bp::ConfigError("cannot write report: " + args.out);
  out << report.dump(2) << '\n';
}

bp::Json ClusterJson(const bp::FixedPointCluster& c) {
  return {{"theta", c.representative.theta.Probabilities()},
          {"q", c.representative.q.Flatten()},
          {"line_offset", c.representative.line_offset
                              ? bp::Json(*c.representative.line_offset)
                              : bp::Json(nullptr)},
          {"max_br_residual", c.representative.max_br_residual},
          {"grid_members", c.members}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning dynamics with Bayesian belief updates"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run seeded batches of the dynamics");
  std::string config_path, preset;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> runs_override, threads_override;
  std::optional<std::string> out_override;
  simulate->add_option("--config", config_path, "JSON config file");
  simulate->add_option("--preset", preset, "Named preset (instead of --config)");
  simulate->add_option("--seed", seed_override, "Master seed");
  simulate->add_option("--runs", runs_override, "Number of runs");
  simulate->add_option("--out", out_override, "Output directory");
  simulate->add_option("--threads", threads_override, "Worker threads");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Run an analysis routine");
  analyze->require_subcommand(1);

  GameArgs fp_args;
  double fp_grid = 0.01, fp_radius = 0.05;
  auto* fixed_points = analyze->add_subcommand("fixed-points", "Enumerate fixed points");
  AddGameArgs(fixed_points, fp_args);
  fixed_points->add_option("--grid", fp_grid, "Belief simplex step")->capture_default_str();
  fixed_points->add_option("--radius", fp_radius, "Cluster radius")->capture_default_str();

  GameArgs st_args;
  std::vector<double> st_theta;
  double st_eps = 0.1, st_gamma = 0.9, st_delta = 0.1, st_belief_eps = 0.0;
  std::size_t st_samples = 512;
  std::uint64_t st_seed = 0;
  std::string st_mode = "EQ";
  auto* stability = analyze->add_subcommand("stability", "Thresholds and condition (b)");
  AddGameArgs(stability, st_args);
  stability->add_option("--theta", st_theta, "Fixed-point belief")->delimiter(',');
  stability->add_option("--eps", st_eps, "eps-hat")->capture_default_str();
  stability->add_option("--gamma", st_gamma, "Confidence gamma")->capture_default_str();
  stability->add_option("--delta", st_delta, "Strategy neighborhood radius")
      ->capture_default_str();
  stability->add_option("--belief-eps", st_belief_eps,
                        "Belief neighborhood radius (BR mode)");
  stability->add_option("--samples", st_samples)->capture_default_str();
  stability->add_option("--seed", st_seed)->capture_default_str();
  stability->add_option("--mode", st_mode, "EQ or BR")->capture_default_str();

  GameArgs rate_args;
  std::string rate_config, rate_preset;
  std::optional<std::size_t> rate_runs;
  std::optional<std::uint64_t> rate_seed;
  double rate_tol = 0.2;
  bool rate_early_stop = false;
  auto* rate = analyze->add_subcommand("rate", "Fitted belief decay vs analytic KL");
  rate->add_option("--config", rate_config, "JSON config file");
  rate->add_option("--preset", rate_preset, "Named preset");
  rate->add_option("--runs", rate_runs);
  rate->add_option("--seed", rate_seed);
  rate->add_option("--tolerance", rate_tol, "Relative tolerance on the median")
      ->capture_default_str();
  // The rate is a limit, so by default every run uses its full horizon.
  rate->add_flag("--early-stop", rate_early_stop,
                 "Keep the config's convergence stop");
  rate->add_option("--out", rate_args.out, "Report path (default: stdout)");

  GameArgs flow_args;
  std::vector<double> flow_theta, flow_q0, flow_weights;
  double flow_dt = 1e-3, flow_horizon = 50.0, flow_tol = 1e-3;
  std::string flow_csv;
  auto* flow = analyze->add_subcommand("flow", "Integrate the best-response flow");
  AddGameArgs(flow, flow_args);
  flow->add_option("--theta", flow_theta)->delimiter(',');
  flow->add_option("--q0", flow_q0)->delimiter(',')->required();
  flow->add_option("--weights", flow_weights)->delimiter(',');
  flow->add_option("--dt", flow_dt)->capture_default_str();
  flow->add_option("--horizon", flow_horizon)->capture_default_str();
  flow->add_option("--residual-tol", flow_tol)->capture_default_str();
  flow->add_option("--path-csv", flow_csv, "Write the path to this CSV");

  GameArgs mg_args;
  std::vector<double> mg_theta, mg_q;
  std::size_t mg_samples = 100000;
  std::uint64_t mg_seed = 0;
  auto* martingale = analyze->add_subcommand("martingale", "Belief-ratio martingale check");
  AddGameArgs(martingale, mg_args);
  martingale->add_option("--theta", mg_theta)->delimiter(',');
  martingale->add_option("--q", mg_q)->delimiter(',')->required();
  martingale->add_option("--samples", mg_samples)->capture_default_str();
  martingale->add_option("--seed", mg_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      bp::Json j;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw bp::ConfigError("cannot read config: " + config_path);
        try {
          j = bp::Json::parse(in);
        } catch (const bp::Json::exception& e) {
          throw bp::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
      } else if (!preset.empty()) {
        j = {{"preset", preset}};
      } else {
        throw bp::ConfigError("simulate needs --config or --preset");
      }
      if (seed_override) j["seed"] = *seed_override;
      if (runs_override) j["runs"] = *runs_override;
      if (out_override) j["out_dir"] = *out_override;
      if (threads_override) j["threads"] = *threads_override;
      const bp::ExperimentConfig config = bp::ParseConfig(j);
      const bp::ExperimentResult result = bp::RunExperiment(config, true);
      const bp::Json agg = result.ToJson()["aggregate"];
      std::cout << agg.dump() << '\n';
      return kExitOk;
    }

    if (fixed_points->parsed()) {
      auto game = BuildGame(fp_args);
      const auto clusters = bp::EnumerateFixedPoints(*game, fp_grid, fp_radius);
      bp::Json report;
      report["game"] = game->id();
      report["grid"] = fp_grid;
      bp::Json list = bp::Json::array();
      for (const auto& c : clusters) list.push_back(ClusterJson(c));
      report["clusters"] = list;
      report["count"] = clusters.size();
      if (!clusters.empty()) {
        const auto star = bp::Belief::PointMass(game->params().size(),
                                                game->params().true_index());
        report["globally_stable_exists"] = bp::CheckGlobalStability(clusters, star);
      }
      Emit(fp_args, report);
      return kExitOk;
    }

    if (stability->parsed()) {
      auto game = BuildGame(st_args);
      const bp::Belief theta = BeliefArg(*game, st_theta);
      const std::size_t n = game->params().size();
      const std::size_t outside = n - theta.Support().size();
      const auto th = bp::ComputeStabilityThresholds(theta, st_eps, st_gamma, n, outside);
      const bp::DynamicsMode mode = bp::ParseMode(st_mode);
      const auto cond = bp::CheckLocalStabilityConditionB(
          *game, theta, st_delta, st_samples, mode.rule, st_belief_eps, st_seed);
      bp::Json report;
      report["thresholds"] = {{"rho1", th.rho1}, {"rho2", th.rho2}, {"rho3", th.rho3},
                              {"eps_hat", st_eps}, {"gamma", st_gamma},
                              {"n_params", n}, {"n_outside_support", outside}};
      report["condition_b"] = {{"passed", cond.passed},
                               {"samples", cond.samples_checked},
                               {"reason", cond.reason}};
      if (cond.counterexample_q) {
        report["condition_b"]["counterexample_q"] = cond.counterexample_q->Flatten();
      }
      Emit(st_args, report);
      return cond.passed ? kExitOk : kExitCheck;
    }

    if (rate->parsed()) {
      bp::Json j;
      if (!rate_config.empty()) {
        std::ifstream in(rate_config);
        if (!in) throw bp::ConfigError("cannot read config: " + rate_config);
        j = bp::Json::parse(in);
      } else if (!rate_preset.empty()) {
        j = {{"preset", rate_preset}};
      } else {
        throw bp::ConfigError("rate needs --config or --preset");
      }
      if (rate_runs) j["runs"] = *rate_runs;
      if (rate_seed) j["seed"] = *rate_seed;
      if (!rate_early_stop) j["stop_on_convergence"] = false;
      const bp::ExperimentConfig config = bp::ParseConfig(j);
      if (config.mode.estimator != bp::Estimator::kBayes) {
        throw bp::ConfigError("rate needs a Bayesian mode");
      }
      auto game = bp::MakeGame(config.game, config.game_overrides);
      const std::size_t s_star = game->params().true_index();
      std::vector<std::vector<double>> rel(game->params().size());
      bp::Json runs = bp::Json::array();
      for (std::size_t r = 0; r < config.runs; ++r) {
        const auto seed = bp::RunSeed(config.seed, r);
        const auto traj = bp::RunDynamics(*game, bp::MakeDynamicsConfig(config, *game, seed));
        bp::Json entry = {{"run", r}};
        for (std::size_t s = 0; s < game->params().size(); ++s) {
          if (s == s_star) continue;
          const auto slope = bp::FitConvergenceRate(traj, s, config.burn_in);
          if (!slope) continue;
          const double kl = bp::KlDivergence(*game, s_star, s, traj.terminal().q).value;
          entry[game->params().label(s)] = {{"slope", *slope}, {"analytic", -kl}};
          if (kl > 0.0) rel[s].push_back(std::abs(*slope + kl) / kl);
        }
        runs.push_back(entry);
      }
      bp::Json report;
      report["runs"] = runs;
      bool ok = true;
      for (std::size_t s = 0; s < rel.size(); ++s) {
        if (rel[s].empty()) continue;
        auto v = rel[s];
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        const double median = v[v.size() / 2];
        report["median_relative_error"][game->params().label(s)] = median;
        ok = ok && median <= rate_tol;
      }
      report["passed"] = ok;
      Emit(rate_args, report);
      return ok ? kExitOk : kExitCheck;
    }

    if (flow->parsed()) {
      auto game = BuildGame(flow_args);
      const bp::Belief theta = BeliefArg(*game, flow_theta);
      const bp::StrategyProfile q0 = ProfileArg(*game, flow_q0);
      if (flow_weights.empty()) flow_weights.assign(game->num_players(), 1.0);
      const auto result =
          bp::BrFlowIntegrate(*game, theta, q0, flow_weights, flow_dt, flow_horizon);
      bool monotone = true;
      for (std::size_t k = 1; k < result.potential.size(); ++k) {
        if (result.potential[k] < result.potential[k - 1] - 1e-8) monotone = false;
      }
      if (!flow_csv.empty()) {
        std::ofstream out(flow_csv, std::ios::binary);
        if (!out) throw bp::ConfigError("cannot write " + flow_csv);
        out << "tau";
        const auto header = bp::TrajectoryHeader(*game, {});
        for (const auto& h : header) {
          if (h.rfind("q_", 0) == 0) out << ',' << h;
        }
        if (!result.potential.empty()) out << ",potential";
        out << '\n';
        for (std::size_t k = 0; k < result.path.size(); ++k) {
          out << bp::FormatDouble(result.times[k]);
          for (double x : result.path[k].Flatten()) out << ',' << bp::FormatDouble(x);
          if (!result.potential.empty()) {
            out << ',' << bp::FormatDouble(result.potential[k]);
          }
          out << '\n';
        }
      }
      bp::Json report;
      report["terminal"] = result.path.back().Flatten();
      report["terminal_residual"] = result.terminal_residual;
      report["steps"] = result.path.size() - 1;
      report["potential_monotone"] = monotone;
      if (!result.potential.empty()) {
        report["potential_start"] = result.potential.front();
        report["potential_end"] = result.potential.back();
      }
      const bool ok = monotone && result.terminal_residual <= flow_tol;
      report["passed"] = ok;
      Emit(flow_args, report);
      return ok ? kExitOk : kExitCheck;
    }

    if (martingale->parsed()) {
      auto game = BuildGame(mg_args);
      const bp::Belief theta = BeliefArg(*game, mg_theta);
      const bp::StrategyProfile q = ProfileArg(*game, mg_q);
      const std::size_t s_star = game->params().true_index();
      bp::Json rows = bp::Json::array();
      bool ok = true;
      for (std::size_t s = 0; s < game->params().size(); ++s) {
        if (s == s_star) continue;
        const auto est = bp::ConditionalRatioExpectation(*game, theta, q, s, mg_samples,
                                                         bp::DeriveSeed(mg_seed, s));
        const double prior = theta.prob(s) / theta.prob(s_star);
        const bool match = std::abs(est.mean - prior) <= 3.0 * est.std_error + 1e-10;
        ok = ok && match;
        rows.push_back({{"parameter", game->params().label(s)},
                        {"estimate", est.mean},
                        {"std_error", est.std_error},
                        {"prior_ratio", prior},
                        {"within_3se", match}});
      }
      const auto drift = bp::TrueLogBeliefDrift(*game, theta, q, mg_samples,
                                                bp::DeriveSeed(mg_seed, 1u << 20));
      const double analytic = bp::MixtureKlDivergence(*game, theta, q);
      const double slack = 3.0 * drift.std_error + 1e-10;
      const bool drift_ok = std::abs(drift.mean - analytic) <= slack &&
                            drift.mean >= -slack;
      ok = ok && drift_ok;
      bp::Json report;
      report["ratios"] = rows;
      report["drift"] = {{"estimate", drift.mean},
                         {"std_error", drift.std_error},
                         {"analytic_kl", analytic},
                         {"within_3se", drift_ok}};
      report["passed"] = ok;
      Emit(mg_args, report);
      return ok ? kExitOk : kExitCheck;
    }
  } catch (const bp::BeliefplayError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bp::Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
