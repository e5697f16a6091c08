#pragma once

#include <cstdint>
#include <vector>

#include "episodes/episode.hpp"
#include "policy/model.hpp"

namespace sw {

// One training window before perception runs.
struct WindowSample {
  ObservationWindow window;
  std::vector<Vec2> gt_waypoints;  // ego frame at step t
  bool gt_arrived = false;
  Scenario scenario = Scenario::kOther;
  std::uint64_t episode_id = 0;
  std::size_t t = 0;
};

enum class SubgoalMode {
  // Uniform offset in [min_subgoal_steps, max_subgoal_steps].
  kUniformAhead,
  // Uniform offset in [1, j], where j <= max_subgoal_steps is the farthest
  // path point whose chord from the current position keeps every
  // intermediate path point within corridor_m. Mirrors route-node chaining.
  kLineOfSight,
};

struct WindowOptions {
  double radius_m = 1.0;
  SubgoalMode mode = SubgoalMode::kUniformAhead;
  double corridor_m = 0.3;
  // Sub-goal offset range in steps; 0 means "horizon" for the minimum and
  // "3 * horizon" for the maximum.
  std::size_t min_subgoal_steps = 0;
  std::size_t max_subgoal_steps = 0;
  std::uint64_t seed = 0;
};

// Stride-1 windows for every t with N-1 <= t <= L-horizon-1, ego-framed at
// pose t. The sub-goal sits a uniform number of steps ahead (by default
// [horizon, 3*horizon]), clipped to the episode end; gt_arrived =
// |subgoal| <= radius. The offset draw is seeded from (episode id, t, seed).
std::vector<WindowSample> window_episode(const EpisodeRecord& ep, std::size_t context_n, std::size_t horizon,
                                         const WindowOptions& options = {});

}  // namespace sw
