#pragma once

#include <span>
#include <vector>

#include "nav/world.hpp"

namespace sw {

struct RobotState {
  Vec2 position;
  double heading = 0.0;
  double time_s = 0.0;

  Pose2 pose() const { return {position, heading}; }
};

struct SimOptions {
  double max_speed_mps = 1.2;
  double max_turn_rate_deg = 90.0;
  double robot_radius_m = 0.25;
};

struct StepResult {
  RobotState state;
  bool collision = false;
};

// First-order kinematics: turn toward the waypoint; when the required turn
// fits in the turn cap, face it and move up to max_speed * dt, otherwise
// rotate in place. A swept segment that touches an obstacle, passes within
// the robot radius of a moving agent, or leaves the bounds sets `collision`.
StepResult simulator_step(const World& world, const RobotState& state, Vec2 next_waypoint, double dt = 1.0,
                          const SimOptions& options = {});

// Advances to index+1 when the robot is within r of waypoints[index] or
// arrival_prob >= tau. Never regresses; never moves past the last entry.
std::size_t subgoal_controller(const RobotState& state, std::span<const Vec2> waypoints, std::size_t index,
                               double arrival_prob, double r = 1.0, double tau = 0.5);

}  // namespace sw
