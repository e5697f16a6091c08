#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace sw {

std::vector<std::shared_ptr<const FeatureProvider>> scene_providers(const Dataset& dataset,
                                                                   const CameraModel& camera) {
  std::vector<std::shared_ptr<const FeatureProvider>> out;
  out.reserve(dataset.worlds.size());
  for (const World& w : dataset.worlds) out.push_back(std::make_shared<SceneProvider>(std::make_shared<World>(w), camera));
  return out;
}

SampleSet build_samples(const Dataset& dataset, const ModelConfig& config, const SampleOptions& options) {
  const auto providers = scene_providers(dataset, options.camera);
  WindowOptions wo;
  wo.radius_m = config.arrival_radius_m;
  wo.min_subgoal_steps = options.min_subgoal_steps;
  wo.max_subgoal_steps = options.max_subgoal_steps;
  wo.seed = options.subgoal_seed;
  wo.mode = options.subgoal_mode;
  SampleSet set;
  for (const EpisodeRecord& ep : dataset.episodes) {
    const FeatureProvider& provider = *providers.at(ep.world_index);
    for (WindowSample& w : window_episode(ep, config.context_n, config.horizon, wo)) {
      set.samples.push_back({prepare_input(provider, config, w.window), std::move(w.gt_waypoints), w.gt_arrived});
      set.scenarios.push_back(w.scenario);
    }
  }
  return set;
}

std::vector<EvalSample> evaluate_model(const PolicyModel& model, const SampleSet& set) {
  std::vector<EvalSample> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const TrainingSample& s = set.samples[i];
    out.push_back({model.predict(s.input).waypoints, s.gt_waypoints, s.input.subgoal, set.scenarios[i]});
  }
  return out;
}

std::vector<EvalSample> straight_baseline(const SampleSet& set) {
  std::vector<EvalSample> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const TrainingSample& s = set.samples[i];
    std::vector<Vec2> pred;
    for (std::size_t k = 1; k <= s.gt_waypoints.size(); ++k) pred.push_back({static_cast<double>(k), 0.0});
    out.push_back({std::move(pred), s.gt_waypoints, s.input.subgoal, set.scenarios[i]});
  }
  return out;
}

std::vector<PlannedRoute> sample_routes(const World& world, const RouteSuiteOptions& options) {
  const WaypointGraph graph = build_waypoint_graph(world);
  if (graph.size() < 2) throw GenerationError("waypoint graph has fewer than two nodes");
  SplitMix rng(hash_combine({options.seed, 0x524fULL}));
  std::vector<PlannedRoute> out;
  const std::size_t budget = 1000 * std::max<std::size_t>(options.routes, 1);
  for (std::size_t tries = 0; out.size() < options.routes; ++tries) {
    if (tries >= budget) throw GenerationError("could not sample " + std::to_string(options.routes) + " routes");
    const auto last = static_cast<std::int64_t>(graph.size() - 1);
    const auto a = static_cast<std::size_t>(rng.integer(0, last));
    const auto b = static_cast<std::size_t>(rng.integer(0, last));
    if (distance(graph.node(a), graph.node(b)) < options.min_separation_m) continue;
    try {
      const PlanResult plan = astar_plan(graph, a, b);
      out.push_back({route_positions(graph, plan), plan.cost});
    } catch (const NoPathError&) {
    }
  }
  return out;
}

std::vector<RouteRun> run_routes(NavPolicy& policy, const World& world, std::span<const PlannedRoute> routes,
                                 const RouteSuiteOptions& suite, RolloutOptions rollout_options) {
  std::vector<RouteRun> out;
  out.reserve(routes.size());
  for (const PlannedRoute& r : routes) {
    rollout_options.max_steps =
        static_cast<std::size_t>(std::ceil(suite.step_factor * r.cost)) + suite.step_slack;
    out.push_back({r, rollout(policy, world, r.waypoints, rollout_options)});
  }
  return out;
}

double success_rate(std::span<const RouteRun> runs) {
  if (runs.empty()) throw EmptySetError("success_rate: no routes");
  std::size_t ok = 0;
  for (const RouteRun& r : runs) ok += r.result.success() ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(runs.size());
}

std::string trajectories_to_tsv(std::span<const RouteRun> runs) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "route\tstep\tt_s\tx\ty\theading_rad\tsubgoal_index\toutcome\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RolloutResult& r = runs[i].result;
    for (std::size_t s = 0; s < r.trajectory.size(); ++s) {
      const RobotState& st = r.trajectory[s];
      const std::size_t sub = s == 0 ? (runs[i].route.waypoints.size() > 1 ? 1 : 0) : r.subgoal_indices[s - 1];
      out << i << '\t' << s << '\t' << st.time_s << '\t' << st.position.x << '\t' << st.position.y << '\t'
          << st.heading << '\t' << sub << '\t' << rollout_outcome_name(r.outcome) << '\n';
    }
  }
  return out.str();
}

}  // namespace sw

