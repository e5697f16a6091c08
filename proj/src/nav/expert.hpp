#pragma once

#include <span>

#include "episodes/episode.hpp"
#include "nav/sim.hpp"

namespace sw {

struct ExpertOptions {
  double speed_mps = 1.0;
  // A final partial step shorter than this is dropped.
  double min_final_step_m = 0.05;
  // Every route segment must keep this distance from static obstacles.
  double min_clearance_m = 0.25;
};

// Samples the route polyline at constant speed once per second. heading[t]
// is the direction of arrival at t (the first heading faces the next sample).
// Throws GenerationError when a route segment is blocked.
EpisodeRecord scripted_expert(const World& world, std::span<const Vec2> route, std::uint64_t episode_id,
                              const ExpertOptions& options = {});

}  // namespace sw
