#include "nav/sim.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace sw {

StepResult simulator_step(const World& world, const RobotState& state, Vec2 next_waypoint, double dt,
                          const SimOptions& options) {
  if (!(dt > 0.0)) throw ValidationError("dt", "must be positive");
  StepResult out{state, false};
  out.state.time_s = state.time_s + dt;
  const Vec2 delta = next_waypoint - state.position;
  const double dist = delta.norm();
  if (dist > 1e-12) {
    const double turn = wrap_angle(std::atan2(delta.y, delta.x) - state.heading);
    const double max_turn = deg_to_rad(options.max_turn_rate_deg) * dt;
    if (std::abs(turn) > max_turn) {
      out.state.heading = wrap_angle(state.heading + std::copysign(max_turn, turn));
    } else {
      out.state.heading = std::atan2(delta.y, delta.x);
      const double travel = std::min(dist, options.max_speed_mps * dt);
      out.state.position = dist <= travel ? next_waypoint : state.position + delta * (travel / dist);
    }
  }
  const Vec2 a = state.position, b = out.state.position;
  if (!world.bounds.contains(b)) out.collision = true;
  for (const Polygon& poly : world.obstacles) {
    if (out.collision) break;
    if (segment_polygon_distance(a, b, poly) <= options.robot_radius_m) out.collision = true;
  }
  for (const MovingAgent& agent : world.agents) {
    if (out.collision) break;
    const double d = min_distance_linear_motion(a, b, agent.position_at(state.time_s),
                                                agent.position_at(out.state.time_s));
    if (d <= options.robot_radius_m + agent.radius) out.collision = true;
  }
  return out;
}

std::size_t subgoal_controller(const RobotState& state, std::span<const Vec2> waypoints, std::size_t index,
                               double arrival_prob, double r, double tau) {
  if (waypoints.empty()) throw ValidationError("waypoints", "must not be empty");
  if (!(r > 0.0)) throw ValidationError("r", "must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("tau", "must lie in (0, 1)");
  index = std::min(index, waypoints.size() - 1);
  if (index + 1 == waypoints.size()) return index;
  if (distance(state.position, waypoints[index]) <= r || arrival_prob >= tau) return index + 1;
  return index;
}

}  // namespace sw
