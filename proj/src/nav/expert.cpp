#include "nav/expert.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "nav/graph.hpp"

namespace sw {

EpisodeRecord scripted_expert(const World& world, std::span<const Vec2> route, std::uint64_t episode_id,
                              const ExpertOptions& options) {
  if (route.empty()) throw GenerationError("empty route");
  for (std::size_t i = 1; i < route.size(); ++i) {
    if (segment_clearance(world, route[i - 1], route[i]) < options.min_clearance_m) {
      throw GenerationError("route segment " + std::to_string(i - 1) + " passes through an obstacle");
    }
  }
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < route.size(); ++i) cumulative.push_back(cumulative.back() + distance(route[i - 1], route[i]));
  const double total = cumulative.back();
  // Segment holding arc length s; a point on a vertex belongs to the segment it starts.
  const auto segment_of = [&](double s) {
    for (std::size_t i = 1; i < route.size(); ++i) {
      if (s < cumulative[i]) return i;
    }
    return route.size() - 1;
  };
  const auto at = [&](double s) {
    if (route.size() == 1) return route.front();
    const std::size_t i = segment_of(s);
    const double seg = cumulative[i] - cumulative[i - 1];
    return seg > 0.0 ? route[i - 1] + (route[i] - route[i - 1]) * (std::min(s - cumulative[i - 1], seg) / seg)
                     : route[i];
  };

  EpisodeRecord ep;
  ep.episode_id = episode_id;
  ep.source = EpisodeSource::kSynthetic;
  const double step = options.speed_mps;
  const auto whole = static_cast<std::size_t>(std::floor(total / step + 1e-9));
  std::vector<double> arc;
  for (std::size_t t = 0; t <= whole; ++t) arc.push_back(std::min(static_cast<double>(t) * step, total));
  if (total - arc.back() > options.min_final_step_m) arc.push_back(total);
  for (double s : arc) ep.positions.push_back(s >= total ? route.back() : at(s));

  // Steps inside one segment take that segment's exact direction, so
  // straight stretches have bitwise-equal headings.
  ep.headings.resize(ep.positions.size(), 0.0);
  for (std::size_t t = 1; t < ep.positions.size(); ++t) {
    const std::size_t a = segment_of(arc[t - 1]);
    const bool same = arc[t] <= cumulative[a];
    Vec2 d = ep.positions[t] - ep.positions[t - 1];
    if (same && route.size() > 1) d = route[a] - route[a - 1];
    ep.headings[t] = std::atan2(d.y, d.x);
  }
  if (ep.positions.size() > 1) ep.headings[0] = ep.headings[1];
  for (std::size_t t = 0; t < ep.positions.size(); ++t) ep.timestamps.push_back(static_cast<double>(t));
  ep.frames = frames_for_path(hash_combine({world.seed, episode_id}), ep.positions, ep.headings, ep.timestamps);
  return ep;
}

}  // namespace sw
