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

#ifndef BELIEFPLAY_EXPERIMENT_H_
#define BELIEFPLAY_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "beliefplay/analysis.h"
#include "beliefplay/dynamics.h"
#include "beliefplay/model.h"

namespace beliefplay {

using Json = nlohmann::json;

// Invalid configuration or command-line input.
class ConfigError : public BeliefplayError {
 public:
  using BeliefplayError::BeliefplayError;
};

// Builds a game from its id and constant overrides. Overrides use the field
// names of the game's Options struct; "grid" selects a gridded parameter set
// for cournot and affine_gaussian.
std::unique_ptr<GameModel> MakeGame(const std::string& id,
                                    const Json& overrides = Json::object());
std::vector<std::string> GameIds();

// {"type": "constant", "alpha": a} | {"type": "harmonic"} |
// {"type": "alternating"} | {"type": "phase_shifted_harmonic"} |
// {"type": "alternating_harmonic"} | {"type": "geometric", "ratio": r} |
// {"type": "custom", "table": [[...], ...]}. A bare string names the type.
StepsizeSchedule ParseSchedule(const Json& spec, std::size_t num_players);

// Reshapes a flat list into a profile shaped like the game's strategy space.
StrategyProfile ProfileFromFlat(const StrategySpace& space,
                                std::span<const double> flat);

struct ExperimentConfig {
  std::string name = "experiment";
  std::string game = "cournot";
  Json game_overrides = Json::object();
  DynamicsMode mode;
  std::vector<double> theta1;  // empty: uniform
  std::vector<double> q1;      // flattened
  Json schedule = "harmonic";
  std::size_t max_steps = 2000;
  ConvergenceCriterion convergence;
  bool stop_on_convergence = true;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::size_t threads = 0;  // 0: hardware concurrency
  // Simplex step for fixed-point enumeration; nullopt disables it.
  std::optional<double> fixed_point_step;
  double basin_radius = 0.05;
  double burn_in = 0.5;
  std::vector<double> prior_log_density;  // MAP
  std::optional<std::vector<std::vector<double>>> initial_coefficients;  // OLS

  Json ToJson() const;
};

// Named presets "example1" .. "example7", "map_cournot", "ols_cournot".
std::vector<std::string> PresetNames();
Json Preset(const std::string& name);

// A "preset" key pulls in the named preset; remaining keys patch it.
ExperimentConfig ParseConfig(const Json& json);
ExperimentConfig LoadConfig(const std::string& path);

// Per-run seed: a fixed 64-bit mix of (master seed, run index).
std::uint64_t RunSeed(std::uint64_t master, std::size_t run);

DynamicsConfig MakeDynamicsConfig(const ExperimentConfig& config,
                                  const GameModel& game, std::uint64_t seed);

// The trajectory as written to disk. Missing observation cells are NaN.
struct TrajectoryTable {
  std::vector<std::string> header;
  std::size_t n_state = 0;
  std::size_t n_q = 0;
  std::size_t n_obs = 0;
  std::vector<std::vector<double>> rows;
};

// step, theta_<label|coordinate>..., q_<player>_<dim>..., obs_<k>...
std::vector<std::string> TrajectoryHeader(const GameModel& game,
                                          const DynamicsMode& mode);
TrajectoryTable ToTable(const Trajectory& trajectory, const GameModel& game);
std::string FormatDouble(double x);
void WriteCsv(const TrajectoryTable& table, const std::string& path);
TrajectoryTable ReadCsv(const std::string& path);

struct RunSummary {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t steps = 0;  // recorded states
  std::optional<std::size_t> converged_at;
  std::vector<double> terminal_state;
  std::vector<double> terminal_q;
  std::optional<std::size_t> nearest_fixed_point;
  std::optional<double> distance;
  // Excluded parameters: (label, fitted slope of log theta per step).
  std::vector<std::pair<std::string, double>> decay_slopes;

  Json ToJson() const;
};

struct SummaryContext {
  const GameModel* game = nullptr;
  DynamicsMode mode;
  ConvergenceCriterion convergence;
  std::vector<FixedPointCluster> clusters;
  std::vector<EquilibriumSet> cluster_eq;
  double burn_in = 0.5;
};

SummaryContext MakeSummaryContext(const ExperimentConfig& config,
                                  const GameModel& game);
// Everything is derived from the table, so a re-read CSV gives the same
// summary bit for bit.
RunSummary SummarizeRun(const TrajectoryTable& table, std::size_t run,
                        std::uint64_t seed, const SummaryContext& context);
// Distance of a (state, q) pair to a fixed-point cluster: L-infinity in the
// belief, and in q either L-infinity or the distance to the EQ line.
double FixedPointDistance(const SummaryContext& context, std::size_t cluster,
                          std::span<const double> state,
                          std::span<const double> q);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<FixedPointCluster> clusters;
  std::vector<RunSummary> runs;

  Json ToJson() const;
};

// Runs every seed in a thread pool. With write_files, each run's CSV goes to
// out_dir/run_<index>.csv and the summary to out_dir/summary.json.
ExperimentResult RunExperiment(const ExperimentConfig& config,
                               bool write_files = true);

}  // namespace beliefplay

#endif  // BELIEFPLAY_EXPERIMENT_H_
