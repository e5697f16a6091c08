#pragma once

#include <memory>
#include <vector>

#include "episodes/dataset.hpp"
#include "episodes/window.hpp"
#include "metrics/metrics.hpp"
#include "nav/rollout.hpp"
#include "policy/train.hpp"

namespace sw {

// Scene renderers for every world of a dataset, indexed like Dataset::worlds.
std::vector<std::shared_ptr<const FeatureProvider>> scene_providers(const Dataset& dataset,
                                                                   const CameraModel& camera = {});

// Windows of every episode with perception already run.
struct SampleSet {
  std::vector<TrainingSample> samples;
  std::vector<Scenario> scenarios;

  std::size_t size() const { return samples.size(); }
};

struct SampleOptions {
  std::uint64_t subgoal_seed = 0;
  SubgoalMode subgoal_mode = SubgoalMode::kUniformAhead;
  std::size_t min_subgoal_steps = 0;  // 0: horizon
  std::size_t max_subgoal_steps = 0;  // 0: 3 * horizon
  CameraModel camera;
};

SampleSet build_samples(const Dataset& dataset, const ModelConfig& config, const SampleOptions& options = {});

std::vector<EvalSample> evaluate_model(const PolicyModel& model, const SampleSet& set);
// Walks straight ahead at 1 m/s regardless of input.
std::vector<EvalSample> straight_baseline(const SampleSet& set);

struct RouteSuiteOptions {
  std::size_t routes = 50;
  std::uint64_t seed = 1;
  // Start and goal nodes at least this far apart (straight line).
  double min_separation_m = 10.0;
  // Step budget per route: factor * planned length + slack.
  double step_factor = 3.0;
  std::size_t step_slack = 20;
};

struct PlannedRoute {
  std::vector<Vec2> waypoints;
  double cost = 0.0;
};

// Random solvable routes over the waypoint graph of `world`, deterministic in
// the seed. Throws GenerationError when the graph cannot supply them.
std::vector<PlannedRoute> sample_routes(const World& world, const RouteSuiteOptions& options);

struct RouteRun {
  PlannedRoute route;
  RolloutResult result;
};

std::vector<RouteRun> run_routes(NavPolicy& policy, const World& world, std::span<const PlannedRoute> routes,
                                 const RouteSuiteOptions& suite, RolloutOptions rollout_options = {});

double success_rate(std::span<const RouteRun> runs);

// One row per simulated step: route, step, t_s, x, y, heading_rad,
// subgoal_index, outcome.
std::string trajectories_to_tsv(std::span<const RouteRun> runs);

}  // namespace sw

