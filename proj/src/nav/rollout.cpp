#include "nav/rollout.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace sw {

PolicyOutput ModelPolicy::act(const PolicyQuery& query) { return model_.predict(*provider_, query.window); }

PolicyOutput OraclePolicy::act(const PolicyQuery& query) {
  const Vec2 goal = to_ego(query.state.pose(), query.subgoal_world);
  const double dist = goal.norm();
  PolicyOutput out;
  for (std::size_t k = 1; k <= horizon_; ++k) {
    const double s = std::min(dist, step_m_ * static_cast<double>(k));
    out.waypoints.push_back(dist > 0.0 ? goal * (s / dist) : Vec2{0, 0});
  }
  out.arrival_prob = 0.0;
  return out;
}

PolicyOutput ZeroPolicy::act(const PolicyQuery&) {
  return {std::vector<Vec2>(horizon_, Vec2{0, 0}), 0.0};
}

const char* rollout_outcome_name(RolloutOutcome o) {
  switch (o) {
    case RolloutOutcome::kSuccess: return "success";
    case RolloutOutcome::kCollision: return "collision";
    case RolloutOutcome::kTimeout: return "timeout";
  }
  return "timeout";
}

namespace {

ObservationWindow build_window(const std::vector<RobotState>& history, Vec2 subgoal_world,
                               const RolloutOptions& o) {
  const std::size_t n = o.context_n;
  std::vector<RobotState> states;
  const RobotState& first = history.front();
  const Vec2 back{std::cos(first.heading), std::sin(first.heading)};
  const std::size_t have = std::min(history.size(), n);
  for (std::size_t i = have; i < n; ++i) {
    const double k = static_cast<double>(n - i);
    states.push_back({first.position - back * k, first.heading, first.time_s - k});
  }
  for (std::size_t i = history.size() - have; i < history.size(); ++i) states.push_back(history[i]);

  std::vector<Vec2> positions;
  std::vector<double> headings, times;
  for (const RobotState& s : states) {
    positions.push_back(s.position);
    headings.push_back(s.heading);
    times.push_back(s.time_s);
  }
  ObservationWindow w;
  w.frames = frames_for_path(o.frame_seed, positions, headings, times, o.rig);
  const Pose2 pose = states.back().pose();
  for (Vec2 p : positions) w.positions.push_back(to_ego(pose, p));
  w.subgoal = to_ego(pose, subgoal_world);
  return w;
}

}  // namespace

RolloutResult rollout(NavPolicy& policy, const World& world, std::span<const Vec2> route,
                      const RolloutOptions& options) {
  if (route.empty()) throw ValidationError("route", "must not be empty");
  RolloutResult result;
  RobotState state{route.front(), 0.0, 0.0};
  if (route.size() > 1) {
    const Vec2 d = route[1] - route[0];
    state.heading = std::atan2(d.y, d.x);
  }
  result.trajectory.push_back(state);
  std::size_t index = route.size() > 1 ? 1 : 0;
  for (std::size_t step = 0; step < options.max_steps; ++step) {
    if (index + 1 == route.size() && distance(state.position, route.back()) <= options.success_radius_m) {
      result.outcome = RolloutOutcome::kSuccess;
      return result;
    }
    PolicyQuery q{build_window(result.trajectory, route[index], options), state, route[index]};
    const PolicyOutput out = policy.act(q);
    if (out.waypoints.empty()) throw ValidationError("waypoints", "policy returned no waypoints");
    const Vec2 target = from_ego(state.pose(), out.waypoints.front());
    const StepResult next = simulator_step(world, state, target, 1.0, options.sim);
    state = next.state;
    result.trajectory.push_back(state);
    if (next.collision) {
      result.collision = true;
      result.outcome = RolloutOutcome::kCollision;
      result.subgoal_indices.push_back(index);
      return result;
    }
    index = subgoal_controller(state, route, index, out.arrival_prob, options.subgoal_radius_m,
                               options.arrival_tau);
    result.subgoal_indices.push_back(index);
  }
  if (index + 1 == route.size() && distance(state.position, route.back()) <= options.success_radius_m) {
    result.outcome = RolloutOutcome::kSuccess;
  }
  return result;
}

}  // namespace sw
