#include "episodes/window.hpp"

#include <algorithm>

#include "common/rng.hpp"

namespace sw {

namespace {

std::size_t line_of_sight_limit(const std::vector<Vec2>& path, std::size_t t, std::size_t last, double corridor) {
  std::size_t best = t + 1;
  for (std::size_t j = t + 2; j <= last; ++j) {
    bool clear = true;
    for (std::size_t i = t + 1; i < j && clear; ++i) {
      clear = point_segment_distance(path[i], path[t], path[j]) <= corridor;
    }
    if (!clear) break;
    best = j;
  }
  return best;
}

}  // namespace

std::vector<WindowSample> window_episode(const EpisodeRecord& ep, std::size_t context_n, std::size_t horizon,
                                         const WindowOptions& options) {
  ep.validate();
  std::vector<WindowSample> out;
  const std::size_t len = ep.length();
  if (context_n == 0 || horizon == 0 || len < context_n + horizon) return out;
  out.reserve(len - context_n - horizon + 1);
  const std::size_t lo = options.min_subgoal_steps == 0 ? horizon : options.min_subgoal_steps;
  const std::size_t hi = std::max(lo, options.max_subgoal_steps == 0 ? 3 * horizon : options.max_subgoal_steps);
  for (std::size_t t = context_n - 1; t + horizon < len; ++t) {
    const Pose2 pose{ep.positions[t], ep.headings[t]};
    WindowSample s;
    s.scenario = ep.scenario;
    s.episode_id = ep.episode_id;
    s.t = t;
    for (std::size_t i = t + 1 - context_n; i <= t; ++i) {
      s.window.frames.push_back(ep.frames[i]);
      s.window.positions.push_back(to_ego(pose, ep.positions[i]));
    }
    for (std::size_t k = 1; k <= horizon; ++k) s.gt_waypoints.push_back(to_ego(pose, ep.positions[t + k]));
    SplitMix rng(hash_combine({ep.episode_id, t, options.seed, 0x5347ULL}));
    std::size_t goal = 0;
    if (options.mode == SubgoalMode::kLineOfSight) {
      const std::size_t limit = line_of_sight_limit(ep.positions, t, std::min(t + hi, len - 1), options.corridor_m);
      goal = static_cast<std::size_t>(
          rng.integer(static_cast<std::int64_t>(t + 1), static_cast<std::int64_t>(limit)));
    } else {
      const auto offset =
          static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
      goal = std::min(t + offset, len - 1);
    }
    s.window.subgoal = to_ego(pose, ep.positions[goal]);
    s.gt_arrived = s.window.subgoal.norm() <= options.radius_m;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace sw
