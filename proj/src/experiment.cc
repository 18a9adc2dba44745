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

#include "beliefplay/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "beliefplay/games.h"
#include "beliefplay/random.h"

namespace beliefplay {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reads the known keys of `overrides` into target fields and rejects the rest.
class OverrideReader {
 public:
  explicit OverrideReader(const Json& overrides) : json_(overrides) {
    if (!json_.is_object()) throw ConfigError("game overrides must be an object");
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!json_.contains(key)) return;
    try {
      out = json_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError("bad value for game constant '" + key + "': " + e.what());
    }
  }

  bool Has(const std::string& key) {
    seen_.insert(key);
    return json_.contains(key);
  }
  const Json& At(const std::string& key) const { return json_.at(key); }

  void Finish() const {
    for (const auto& [key, value] : json_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown game constant: " + key);
    }
  }

 private:
  const Json& json_;
  std::set<std::string> seen_;
};

MapGrid ParseGrid(const Json& j, std::vector<double>& truth) {
  try {
    MapGrid grid;
    grid.lower = j.at("lower").get<std::vector<double>>();
    grid.upper = j.at("upper").get<std::vector<double>>();
    grid.points = j.at("points").get<std::vector<std::size_t>>();
    truth = j.at("truth").get<std::vector<double>>();
    if (grid.lower.size() != grid.upper.size() ||
        grid.points.size() != grid.lower.size()) {
      throw ConfigError("grid lower/upper/points differ in length");
    }
    for (std::size_t n : grid.points) {
      if (n < 2) throw ConfigError("grid needs at least two points per axis");
    }
    return grid;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad grid: ") + e.what());
  }
}

std::vector<double> FlattenJsonProfile(const Json& j) {
  std::vector<double> flat;
  if (!j.is_array()) throw ConfigError("strategy profile must be an array");
  for (const Json& e : j) {
    if (e.is_number()) {
      flat.push_back(e.get<double>());
    } else if (e.is_array()) {
      for (const Json& x : e) flat.push_back(x.get<double>());
    } else {
      throw ConfigError("strategy entries must be numbers or arrays");
    }
  }
  return flat;
}

}  // namespace

std::vector<std::string> GameIds() {
  return {"cournot", "coordination_safe_margin",
          "coordination_increasing_penalty", "public_good", "finite_matrix",
          "affine_gaussian"};
}

std::unique_ptr<GameModel> MakeGame(const std::string& id,
                                    const Json& overrides) {
  OverrideReader r(overrides);
  std::unique_ptr<GameModel> game;
  if (id == "cournot") {
    CournotGame::Options o;
    r.Get("alpha", o.alpha);
    r.Get("beta", o.beta);
    r.Get("labels", o.labels);
    r.Get("true_index", o.true_index);
    r.Get("noise_variance", o.noise_variance);
    r.Get("q_max", o.q_max);
    if (r.Has("grid")) {
      std::vector<double> truth;
      const MapGrid grid = ParseGrid(r.At("grid"), truth);
      game = std::make_unique<CournotGame>(
          CournotGame::OnGrid(grid, truth, o.noise_variance, o.q_max));
    } else {
      game = std::make_unique<CournotGame>(o);
    }
  } else if (id == "coordination_safe_margin") {
    CoordinationSafeMarginGame::Options o;
    r.Get("margins", o.margins);
    r.Get("labels", o.labels);
    r.Get("true_index", o.true_index);
    r.Get("noise_variance", o.noise_variance);
    r.Get("penalty_weight", o.penalty_weight);
    r.Get("q1_bounds", o.q1_bounds);
    r.Get("q2_bounds", o.q2_bounds);
    r.Get("anchor", o.anchor);
    game = std::make_unique<CoordinationSafeMarginGame>(o);
  } else if (id == "coordination_increasing_penalty") {
    CoordinationIncreasingPenaltyGame::Options o;
    r.Get("penalties", o.penalties);
    r.Get("labels", o.labels);
    r.Get("true_index", o.true_index);
    r.Get("noise_variance", o.noise_variance);
    r.Get("knee", o.knee);
    r.Get("q1_bounds", o.q1_bounds);
    r.Get("q2_bounds", o.q2_bounds);
    r.Get("anchor", o.anchor);
    r.Get("search_tolerance", o.search_tolerance);
    game = std::make_unique<CoordinationIncreasingPenaltyGame>(o);
  } else if (id == "public_good") {
    PublicGoodGame::Options o;
    r.Get("alpha", o.alpha);
    r.Get("variance", o.variance);
    r.Get("labels", o.labels);
    r.Get("true_index", o.true_index);
    r.Get("q_max", o.q_max);
    game = std::make_unique<PublicGoodGame>(o);
  } else if (id == "finite_matrix") {
    FiniteMatrixGame::Options o = FiniteMatrixGame::DefaultOptions();
    r.Get("num_actions", o.num_actions);
    r.Get("means", o.means);
    r.Get("noise_variance", o.noise_variance);
    r.Get("labels", o.labels);
    r.Get("true_index", o.true_index);
    game = std::make_unique<FiniteMatrixGame>(o);
  } else if (id == "affine_gaussian") {
    AffineGaussianGame::Options o;
    r.Get("bounds", o.bounds);
    r.Get("candidates", o.candidates);
    r.Get("labels", o.labels);
    r.Get("true_index", o.true_index);
    r.Get("noise_variance", o.noise_variance);
    if (r.Has("grid")) {
      std::vector<double> truth;
      const MapGrid grid = ParseGrid(r.At("grid"), truth);
      game = std::make_unique<AffineGaussianGame>(
          AffineGaussianGame::OnGrid(grid, truth, o.bounds, o.noise_variance));
    } else {
      game = std::make_unique<AffineGaussianGame>(o);
    }
  } else {
    throw ConfigError("unknown game id: " + id);
  }
  r.Finish();
  return game;
}

StepsizeSchedule ParseSchedule(const Json& spec, std::size_t num_players) {
  try {
    const Json s = spec.is_string() ? Json{{"type", spec}} : spec;
    const std::string type = s.at("type").get<std::string>();
    if (type == "constant") return StepsizeSchedule::Constant(s.value("alpha", 1.0));
    if (type == "harmonic") return StepsizeSchedule::Harmonic();
    if (type == "alternating") return StepsizeSchedule::Alternating(num_players);
    if (type == "phase_shifted_harmonic") {
      return StepsizeSchedule::PhaseShiftedHarmonic();
    }
    if (type == "alternating_harmonic") {
      return StepsizeSchedule::AlternatingHarmonic(num_players);
    }
    if (type == "geometric") {
      return StepsizeSchedule::Geometric(s.at("ratio").get<double>());
    }
    if (type == "custom") {
      auto table = s.at("table").get<std::vector<std::vector<double>>>();
      if (table.size() != num_players) {
        throw ConfigError("custom schedule needs one row per player");
      }
      return StepsizeSchedule::Custom(std::move(table));
    }
    throw ConfigError("unknown schedule type: " + type);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad schedule: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const BeliefplayError& e) {
    throw ConfigError(e.what());
  }
}

StrategyProfile ProfileFromFlat(const StrategySpace& space,
                                std::span<const double> flat) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < space.num_players(); ++i) total += space.player(i).dim();
  if (flat.size() != total) {
    throw ConfigError("strategy has " + std::to_string(flat.size()) +
                      " entries, expected " + std::to_string(total));
  }
  StrategyProfile q;
  std::size_t k = 0;
  for (std::size_t i = 0; i < space.num_players(); ++i) {
    q.players.emplace_back(flat.begin() + k, flat.begin() + k + space.player(i).dim());
    k += space.player(i).dim();
  }
  return q;
}

Json ExperimentConfig::ToJson() const {
  Json j;
  j["name"] = name;
  j["game"] = game;
  j["game_overrides"] = game_overrides;
  j["mode"] = ModeName(mode);
  j["theta1"] = theta1;
  j["q1"] = q1;
  j["schedule"] = schedule;
  j["max_steps"] = max_steps;
  j["convergence"] = {{"window", convergence.window},
                      {"eps_theta", convergence.eps_theta},
                      {"eps_q", convergence.eps_q}};
  j["stop_on_convergence"] = stop_on_convergence;
  j["runs"] = runs;
  j["seed"] = seed;
  j["fixed_point_step"] =
      fixed_point_step ? Json(*fixed_point_step) : Json(nullptr);
  j["basin_radius"] = basin_radius;
  j["burn_in"] = burn_in;
  if (!prior_log_density.empty()) j["prior"] = prior_log_density;
  if (initial_coefficients) j["initial_coefficients"] = *initial_coefficients;
  return j;
}

std::vector<std::string> PresetNames() {
  return {"example1", "example2", "example3", "example4", "example5",
          "example6", "example7", "map_cournot", "ols_cournot"};
}

Json Preset(const std::string& name) {
  const Json cournot_init = {{"theta1", {0.1, 0.9}}, {"q1", {0.25, 0.25}}};
  Json j;
  if (name == "example1") {
    j = {{"game", "cournot"}, {"mode", "EQ"},
         {"schedule", {{"type", "constant"}, {"alpha", 1.0}}},
         {"max_steps", 2000}, {"runs", 200}};
    j.update(cournot_init);
  } else if (name == "example2") {
    j = {{"game", "coordination_safe_margin"}, {"mode", "EQ"},
         {"theta1", {1.0 / 3, 1.0 / 3, 1.0 / 3}}, {"q1", {1.0, 2.0}},
         {"schedule", "alternating"}, {"max_steps", 5000}, {"runs", 100}};
  } else if (name == "example3") {
    j = {{"game", "public_good"}, {"mode", "EQ"},
         {"theta1", {0.5, 0.4, 0.1}}, {"q1", {1.0, 0.0}},
         {"schedule", "phase_shifted_harmonic"}, {"max_steps", 20000},
         {"runs", 100}};
  } else if (name == "example4") {
    // With 1/t steps the per-step change shrinks below any fixed window
    // tolerance long before q settles, so run the full horizon.
    j = {{"game", "cournot"}, {"mode", "BR"}, {"schedule", "harmonic"},
         {"max_steps", 300000}, {"stop_on_convergence", false},
         {"runs", 200}};
    j.update(cournot_init);
  } else if (name == "example5") {
    j = {{"game", "coordination_safe_margin"}, {"mode", "BR"},
         {"theta1", {1.0 / 3, 1.0 / 3, 1.0 / 3}}, {"q1", {1.0, 2.0}},
         {"schedule", "alternating_harmonic"}, {"max_steps", 20000},
         {"runs", 100}};
  } else if (name == "example6") {
    j = Preset("example3");
    j["mode"] = "BR";
  } else if (name == "example7") {
    j = {{"game", "coordination_increasing_penalty"}, {"mode", "EQ"},
         {"theta1", {0.5, 0.5}}, {"q1", {1.0, 2.0}},
         {"schedule", {{"type", "constant"}, {"alpha", 1.0}}},
         {"max_steps", 2000}, {"runs", 100}};
  } else if (name == "map_cournot") {
    j = {{"game", "cournot"},
         {"game_overrides",
          {{"grid",
            {{"lower", {1.0, 0.5}}, {"upper", {3.0, 1.5}}, {"points", {9, 9}},
             {"truth", {2.0, 1.0}}}}}},
         {"mode", "MAP-EQ"}, {"q1", {0.25, 0.25}},
         {"schedule", {{"type", "constant"}, {"alpha", 1.0}}},
         // The argmax can sit on a wrong grid point for longer than the
         // window before the likelihood separates it.
         {"max_steps", 5000}, {"stop_on_convergence", false}, {"runs", 20}};
  } else if (name == "ols_cournot") {
    j = {{"game", "cournot"}, {"mode", "OLS-EQ"},
         {"schedule", "harmonic"}, {"max_steps", 5000}, {"runs", 20}};
    j.update(cournot_init);
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  j["name"] = name;
  return j;
}

ExperimentConfig ParseConfig(const Json& input) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  Json j = Json::object();
  if (input.contains("preset")) {
    j = Preset(input.at("preset").get<std::string>());
  }
  Json patch = input;
  patch.erase("preset");
  j.merge_patch(patch);

  static const std::set<std::string> kKnown = {
      "name", "game", "game_overrides", "mode", "theta1", "q1", "schedule",
      "max_steps", "convergence", "stop_on_convergence", "runs", "seed",
      "out_dir", "threads", "fixed_point_step", "basin_radius", "burn_in",
      "prior", "initial_coefficients"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) throw ConfigError("unknown config key: " + key);
  }

  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    c.game = j.value("game", c.game);
    if (j.contains("game_overrides")) c.game_overrides = j.at("game_overrides");
    c.mode = ParseMode(j.value("mode", std::string("EQ")));
    if (j.contains("theta1") && !j.at("theta1").is_null() &&
        !(j.at("theta1").is_string() && j.at("theta1") == "uniform")) {
      c.theta1 = j.at("theta1").get<std::vector<double>>();
    }
    if (!j.contains("q1")) throw ConfigError("config needs q1");
    c.q1 = FlattenJsonProfile(j.at("q1"));
    if (j.contains("schedule")) c.schedule = j.at("schedule");
    c.max_steps = j.value("max_steps", c.max_steps);
    if (j.contains("convergence")) {
      const Json& cv = j.at("convergence");
      c.convergence.window = cv.value("window", c.convergence.window);
      c.convergence.eps_theta = cv.value("eps_theta", c.convergence.eps_theta);
      c.convergence.eps_q = cv.value("eps_q", c.convergence.eps_q);
    }
    c.stop_on_convergence = j.value("stop_on_convergence", c.stop_on_convergence);
    c.runs = j.value("runs", c.runs);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.threads = j.value("threads", c.threads);
    if (j.contains("fixed_point_step") && !j.at("fixed_point_step").is_null()) {
      c.fixed_point_step = j.at("fixed_point_step").get<double>();
    }
    c.basin_radius = j.value("basin_radius", c.basin_radius);
    c.burn_in = j.value("burn_in", c.burn_in);
    if (j.contains("prior")) c.prior_log_density = j.at("prior").get<std::vector<double>>();
    if (j.contains("initial_coefficients")) {
      c.initial_coefficients =
          j.at("initial_coefficients").get<std::vector<std::vector<double>>>();
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const BeliefplayError& e) {
    throw ConfigError(e.what());
  }
  if (c.runs < 1) throw ConfigError("runs must be >= 1");
  if (c.convergence.window < 2) throw ConfigError("convergence window must be >= 2");
  for (double p : c.theta1) {
    if (!(p > 0.0)) throw ConfigError("theta1 must be strictly positive");
  }
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return ParseConfig(j);
}

std::uint64_t RunSeed(std::uint64_t master, std::size_t run) {
  return DeriveSeed(master, run);
}

DynamicsConfig MakeDynamicsConfig(const ExperimentConfig& config,
                                  const GameModel& game, std::uint64_t seed) {
  DynamicsConfig d;
  d.mode = config.mode;
  const std::size_t n = game.params().size();
  if (config.theta1.empty()) {
    d.theta1 = Belief::Uniform(n);
  } else {
    if (config.theta1.size() != n) {
      throw ConfigError("theta1 has " + std::to_string(config.theta1.size()) +
                        " entries, the game has " + std::to_string(n) +
                        " parameters");
    }
    double total = 0.0;
    for (double p : config.theta1) total += p;
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("theta1 must sum to 1");
    d.theta1 = Belief::FromProbabilities(config.theta1);
  }
  d.q1 = ProfileFromFlat(game.space(), config.q1);
  if (!game.space().Contains(d.q1, 1e-9)) {
    throw ConfigError("initial strategy is infeasible");
  }
  d.schedule = ParseSchedule(config.schedule, game.num_players());
  d.max_steps = config.max_steps;
  d.convergence = config.convergence;
  d.stop_on_convergence = config.stop_on_convergence;
  d.seed = seed;
  d.prior_log_density = config.prior_log_density;
  d.initial_coefficients = config.initial_coefficients;
  return d;
}

std::vector<std::string> TrajectoryHeader(const GameModel& game,
                                          const DynamicsMode& mode) {
  std::vector<std::string> h = {"step"};
  if (mode.estimator == Estimator::kBayes) {
    for (const auto& label : game.params().labels()) h.push_back("theta_" + label);
  } else if (const auto* c = dynamic_cast<const ParameterCoordinates*>(&game)) {
    for (const auto& label : c->coordinate_labels()) h.push_back("theta_" + label);
  } else {
    h.push_back("theta_index");
  }
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    for (std::size_t k = 0; k < game.space().player(i).dim(); ++k) {
      h.push_back("q_" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
    }
  }
  std::size_t n_obs = game.observation_dim();
  if (dynamic_cast<const FiniteMatrixGame*>(&game) != nullptr) {
    n_obs += game.num_players();
  }
  for (std::size_t k = 0; k < n_obs; ++k) h.push_back("obs_" + std::to_string(k + 1));
  return h;
}

TrajectoryTable ToTable(const Trajectory& trajectory, const GameModel& game) {
  TrajectoryTable table;
  table.header = TrajectoryHeader(game, trajectory.mode);
  table.n_q = 0;
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    table.n_q += game.space().player(i).dim();
  }
  table.n_obs = 0;
  for (const auto& name : table.header) {
    if (name.rfind("obs_", 0) == 0) ++table.n_obs;
  }
  table.n_state = table.header.size() - 1 - table.n_q - table.n_obs;
  const bool with_actions = dynamic_cast<const FiniteMatrixGame*>(&game) != nullptr;
  for (std::size_t k = 0; k < trajectory.steps.size(); ++k) {
    const TrajectoryStep& step = trajectory.steps[k];
    std::vector<double> row = {static_cast<double>(step.t)};
    const auto state = trajectory.StateVector(k);
    if (state.size() != table.n_state) throw BeliefplayError("state width mismatch");
    row.insert(row.end(), state.begin(), state.end());
    const auto q = step.q.Flatten();
    row.insert(row.end(), q.begin(), q.end());
    if (step.obs) {
      row.insert(row.end(), step.obs->values.begin(), step.obs->values.end());
      if (with_actions) {
        for (int a : step.obs->actions) row.push_back(static_cast<double>(a));
      }
    }
    row.resize(table.header.size(), kNaN);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void WriteCsv(const TrajectoryTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path);
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    out << (k ? "," : "") << table.header[k];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      out << (k ? "," : "") << (k == 0 ? std::to_string(static_cast<long long>(row[0]))
                                       : FormatDouble(row[k]));
    }
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing output file: " + path);
}

TrajectoryTable ReadCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read trajectory: " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  TrajectoryTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory file: " + path);
  table.header = split(line);
  for (const auto& name : table.header) {
    if (name.rfind("theta_", 0) == 0) ++table.n_state;
    if (name.rfind("q_", 0) == 0) ++table.n_q;
    if (name.rfind("obs_", 0) == 0) ++table.n_obs;
  }
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ConfigError("ragged trajectory row in " + path);
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(c.empty() ? kNaN : std::stod(c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Json RunSummary::ToJson() const {
  Json j;
  j["run"] = run;
  j["seed"] = seed;
  j["steps"] = steps;
  j["converged"] = converged_at.has_value();
  j["converged_at"] = converged_at ? Json(*converged_at) : Json(nullptr);
  j["terminal_state"] = terminal_state;
  j["terminal_q"] = terminal_q;
  j["nearest_fixed_point"] =
      nearest_fixed_point ? Json(*nearest_fixed_point) : Json(nullptr);
  j["distance"] = distance ? Json(*distance) : Json(nullptr);
  Json slopes = Json::object();
  for (const auto& [label, slope] : decay_slopes) slopes[label] = slope;
  j["decay_slopes"] = slopes;
  return j;
}

SummaryContext MakeSummaryContext(const ExperimentConfig& config,
                                  const GameModel& game) {
  SummaryContext ctx;
  ctx.game = &game;
  ctx.mode = config.mode;
  ctx.convergence = config.convergence;
  ctx.burn_in = config.burn_in;
  std::optional<double> step = config.fixed_point_step;
  const std::size_t n = game.params().size();
  if (!step && n <= 3) step = n <= 2 ? 0.01 : 0.02;
  if (step && game.capabilities().has_equilibrium_map) {
    ctx.clusters = EnumerateFixedPoints(game, *step);
    for (const auto& c : ctx.clusters) {
      ctx.cluster_eq.push_back(EquilibriumSetOf(game, c.representative.theta));
    }
  }
  return ctx;
}

double FixedPointDistance(const SummaryContext& context, std::size_t cluster,
                          std::span<const double> state,
                          std::span<const double> q) {
  const FixedPointCluster& c = context.clusters.at(cluster);
  const auto theta = c.representative.theta.Probabilities();
  double d = StateDifference(state, theta);
  const EquilibriumSet& eq = context.cluster_eq.at(cluster);
  if (eq.line_offset) {
    d = std::max(d, eq.Distance(ProfileFromFlat(context.game->space(), q)));
  } else {
    d = std::max(d, StateDifference(q, eq.selection.Flatten()));
  }
  return d;
}

RunSummary SummarizeRun(const TrajectoryTable& table, std::size_t run,
                        std::uint64_t seed, const SummaryContext& context) {
  if (table.rows.empty()) throw BeliefplayError("empty trajectory");
  RunSummary s;
  s.run = run;
  s.seed = seed;
  s.steps = table.rows.size();
  auto state_of = [&](const std::vector<double>& row) {
    return std::vector<double>(row.begin() + 1, row.begin() + 1 + table.n_state);
  };
  auto q_of = [&](const std::vector<double>& row) {
    const auto b = row.begin() + 1 + table.n_state;
    return std::vector<double>(b, b + table.n_q);
  };

  ConvergenceTracker tracker(context.convergence);
  for (const auto& row : table.rows) {
    if (!tracker.Add(state_of(row), q_of(row))) {
      s.converged_at.reset();
    } else if (!s.converged_at) {
      s.converged_at = static_cast<std::size_t>(row[0]);
    }
  }
  const auto& last = table.rows.back();
  s.terminal_state = state_of(last);
  s.terminal_q = q_of(last);

  if (context.mode.estimator != Estimator::kBayes) return s;

  for (std::size_t c = 0; c < context.clusters.size(); ++c) {
    const double d = FixedPointDistance(context, c, s.terminal_state, s.terminal_q);
    if (!s.distance || d < *s.distance) {
      s.distance = d;
      s.nearest_fixed_point = c;
    }
  }

  const std::size_t n = table.rows.size();
  const auto start =
      static_cast<std::size_t>(std::floor(context.burn_in * static_cast<double>(n)));
  for (std::size_t p = 0; p < table.n_state; ++p) {
    if (s.terminal_state[p] > kSupportTolerance) continue;
    std::vector<double> xs, ys;
    for (std::size_t k = start; k < n; ++k) {
      const double prob = table.rows[k][1 + p];
      if (prob > 0.0) {
        xs.push_back(table.rows[k][0]);
        ys.push_back(std::log(prob));
      }
    }
    if (xs.size() < 2) continue;
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      mx += xs[k];
      my += ys[k];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    const std::string label = table.header[1 + p].substr(6);
    s.decay_slopes.emplace_back(label, sxy / sxx);
  }
  return s;
}

Json ExperimentResult::ToJson() const {
  Json j;
  j["config"] = config.ToJson();
  Json fps = Json::array();
  for (const auto& c : clusters) {
    Json f;
    f["theta"] = c.representative.theta.Probabilities();
    f["q"] = c.representative.q.Flatten();
    f["line_offset"] = c.representative.line_offset
                           ? Json(*c.representative.line_offset)
                           : Json(nullptr);
    f["grid_members"] = c.members;
    fps.push_back(f);
  }
  j["fixed_points"] = fps;
  Json runs_json = Json::array();
  std::size_t converged = 0, unmatched = 0;
  std::vector<std::size_t> basin(clusters.size(), 0);
  for (const auto& r : runs) {
    runs_json.push_back(r.ToJson());
    if (r.converged_at) ++converged;
    if (r.nearest_fixed_point && r.distance && *r.distance <= config.basin_radius) {
      ++basin[*r.nearest_fixed_point];
    } else {
      ++unmatched;
    }
  }
  j["runs"] = runs_json;
  const double total = static_cast<double>(runs.size());
  Json agg;
  agg["runs"] = runs.size();
  agg["converged_fraction"] = static_cast<double>(converged) / total;
  Json basins = Json::array();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    basins.push_back({{"fixed_point", c},
                      {"fraction", static_cast<double>(basin[c]) / total}});
  }
  agg["basins"] = basins;
  agg["unmatched_fraction"] = static_cast<double>(unmatched) / total;
  agg["basin_radius"] = config.basin_radius;
  j["aggregate"] = agg;
  return j;
}

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               bool write_files) {
  std::unique_ptr<GameModel> game = MakeGame(config.game, config.game_overrides);
  // Validate once up front so configuration errors surface before any work.
  (void)MakeDynamicsConfig(config, *game, 0);
  if (config.mode.rule == UpdateRule::kEquilibrium &&
      !game->capabilities().has_equilibrium_map) {
    throw ConfigError("game " + game->id() + " has no equilibrium map");
  }

  namespace fs = std::filesystem;
  if (write_files) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir)) {
      throw ConfigError("cannot create output directory: " + config.out_dir);
    }
  }

  ExperimentResult result;
  result.config = config;
  const SummaryContext ctx = MakeSummaryContext(config, *game);
  result.clusters = ctx.clusters;
  result.runs.resize(config.runs);

  std::size_t threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t run = next.fetch_add(1);
      if (run >= config.runs) return;
      try {
        const std::uint64_t seed = RunSeed(config.seed, run);
        const Trajectory traj = RunDynamics(*game, MakeDynamicsConfig(config, *game, seed));
        const TrajectoryTable table = ToTable(traj, *game);
        if (write_files) {
          char name[32];
          std::snprintf(name, sizeof(name), "run_%05zu.csv", run);
          WriteCsv(table, (fs::path(config.out_dir) / name).string());
        }
        result.runs[run] = SummarizeRun(table, run, seed, ctx);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.runs;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  if (write_files) {
    const std::string path = (fs::path(config.out_dir) / "summary.json").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path);
    out << result.ToJson().dump(2) << '\n';
  }
  return result;
}

}  // namespace beliefplay
