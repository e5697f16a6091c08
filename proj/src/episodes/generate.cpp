#include "episodes/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "nav/expert.hpp"

namespace sw {
namespace {

bool inside(const World& world, Vec2 p, double border) {
  return p.x >= world.bounds.min.x + border && p.x <= world.bounds.max.x - border &&
         p.y >= world.bounds.min.y + border && p.y <= world.bounds.max.y - border;
}

bool polyline_clear(const World& world, const std::vector<Vec2>& route, const GeneratorOptions& o) {
  for (const Vec2& p : route) {
    if (!inside(world, p, o.border_m)) return false;
  }
  for (std::size_t i = 1; i < route.size(); ++i) {
    if (segment_clearance(world, route[i - 1], route[i]) < o.clearance_m) return false;
  }
  return true;
}

// Keeps the first `length` meters of the polyline.
std::vector<Vec2> truncate(const std::vector<Vec2>& route, double length) {
  std::vector<Vec2> out{route.front()};
  double left = length;
  for (std::size_t i = 1; i < route.size() && left > 0.0; ++i) {
    const double seg = distance(route[i - 1], route[i]);
    if (seg <= left) {
      out.push_back(route[i]);
      left -= seg;
    } else {
      out.push_back(route[i - 1] + (route[i] - route[i - 1]) * (left / seg));
      left = 0.0;
    }
  }
  return out;
}

double polyline_length(const std::vector<Vec2>& route) {
  double total = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i) total += distance(route[i - 1], route[i]);
  return total;
}

Scenario classify(const World& world, const EpisodeRecord& ep, const std::vector<Vec2>& route) {
  // Agents near the walker at the same instant.
  std::size_t max_close = 0;
  for (std::size_t t = 0; t < ep.positions.size(); ++t) {
    std::size_t close = 0;
    for (const MovingAgent& a : world.agents) {
      if (distance(a.position_at(ep.timestamps[t]), ep.positions[t]) < 3.0) ++close;
    }
    max_close = std::max(max_close, close);
  }
  if (max_close >= 2) return Scenario::kCrowd;
  for (const MovingAgent& a : world.agents) {
    for (std::size_t j = 1; j < a.path.size(); ++j) {
      for (std::size_t i = 1; i < route.size(); ++i) {
        if (segments_intersect(a.path[j - 1], a.path[j], route[i - 1], route[i])) return Scenario::kCrossing;
      }
    }
  }
  const double direct = distance(route.front(), route.back());
  if (direct > 0.0 && polyline_length(route) / direct >= 1.2) return Scenario::kDetour;
  for (std::size_t i = 1; i < route.size(); ++i) {
    if (segment_clearance(world, route[i - 1], route[i]) < 2.0) return Scenario::kProximity;
  }
  if (max_heading_change(ep) > deg_to_rad(60.0)) return Scenario::kTurn;
  return Scenario::kOther;
}

std::optional<std::vector<Vec2>> straight_route(const World& world, double length, SplitMix& rng,
                                                const GeneratorOptions& o) {
  const Vec2 start{rng.uniform(world.bounds.min.x + o.border_m, world.bounds.max.x - o.border_m),
                   rng.uniform(world.bounds.min.y + o.border_m, world.bounds.max.y - o.border_m)};
  const double dir = rng.uniform(-std::numbers::pi, std::numbers::pi);
  std::vector<Vec2> route{start, start + Vec2{std::cos(dir), std::sin(dir)} * length};
  if (!polyline_clear(world, route, o)) return std::nullopt;
  return route;
}

// Free travel from `from` along `dir` before the clearance to obstacles drops
// below the margin, probed every 0.25 m up to `limit`.
double free_run(const World& world, Vec2 from, Vec2 dir, double limit, double margin) {
  constexpr double kStep = 0.25;
  double s = 0.0;
  while (s + kStep <= limit) {
    const Vec2 a = from + dir * s, b = from + dir * (s + kStep);
    double clear = std::numeric_limits<double>::infinity();
    for (const Polygon& poly : world.obstacles) clear = std::min(clear, segment_polygon_distance(a, b, poly));
    if (clear < margin) break;
    s += kStep;
  }
  return s;
}

// Walks straight until an obstacle blocks the way, then turns toward the side
// with the longer free run. Both the turn point and its direction are
// therefore visible in the scene ahead.
std::optional<std::vector<Vec2>> turn_route(const World& world, double length, SplitMix& rng,
                                            const GeneratorOptions& o) {
  const Vec2 start{rng.uniform(world.bounds.min.x + o.border_m, world.bounds.max.x - o.border_m),
                   rng.uniform(world.bounds.min.y + o.border_m, world.bounds.max.y - o.border_m)};
  const double dir = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const Vec2 ahead{std::cos(dir), std::sin(dir)};
  const double blocked = free_run(world, start, ahead, length, o.clearance_m);
  if (blocked >= length) return std::nullopt;
  const double first = blocked - rng.uniform(0.5, 2.0);
  if (first < 0.35 * length || first > 0.65 * length) return std::nullopt;
  const Vec2 corner = start + ahead * first;
  const double turn = deg_to_rad(rng.uniform(o.min_turn_deg, o.max_turn_deg));
  const double rest = length - first;
  const Vec2 left{std::cos(dir + turn), std::sin(dir + turn)};
  const Vec2 right{std::cos(dir - turn), std::sin(dir - turn)};
  const double free_left = free_run(world, corner, left, 2.0 * rest, o.clearance_m);
  const double free_right = free_run(world, corner, right, 2.0 * rest, o.clearance_m);
  if (free_left == free_right) return std::nullopt;
  const Vec2 out = free_left > free_right ? left : right;
  std::vector<Vec2> route{start, corner, corner + out * rest};
  if (!polyline_clear(world, route, o)) return std::nullopt;
  return route;
}

std::optional<std::vector<Vec2>> graph_route(const World& world, const WaypointGraph& graph, double length,
                                             SplitMix& rng, const GeneratorOptions& o) {
  if (graph.size() < 2) return std::nullopt;
  const auto pick = [&] { return static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(graph.size()) - 1)); };
  const std::size_t a = pick(), b = pick();
  if (a == b) return std::nullopt;
  try {
    std::vector<Vec2> route = route_positions(graph, astar_plan(graph, a, b));
    if (polyline_length(route) < length) return std::nullopt;
    route = truncate(route, length);
    if (!polyline_clear(world, route, o)) return std::nullopt;
    return route;
  } catch (const NoPathError&) {
    return std::nullopt;
  }
}

}  // namespace

double max_heading_change(const EpisodeRecord& ep) {
  double best = 0.0;
  for (double h : ep.headings) best = std::max(best, std::abs(wrap_angle(h - ep.headings.front())));
  return best;
}

EpisodeRecord generate_synthetic_episode(std::uint64_t seed, const World& world, double length_s,
                                         std::optional<MotionTemplate> motion, const GeneratorOptions& options) {
  if (!(length_s >= 2.0 * static_cast<double>(options.context_n))) {
    throw ValidationError("length_s", "must be at least " + std::to_string(2 * options.context_n) + " s");
  }
  SplitMix rng(hash_combine({seed, world.seed, 0x45504953ULL}));
  const MotionTemplate kind = motion.value_or(static_cast<MotionTemplate>(rng.integer(0, 2)));
  // Expert walks 1 m/s, so the path length in meters equals the duration.
  const double length = std::floor(length_s);
  std::optional<WaypointGraph> graph;
  if (kind == MotionTemplate::kRoute) graph = build_waypoint_graph(world);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::optional<std::vector<Vec2>> route;
    switch (kind) {
      case MotionTemplate::kStraight: route = straight_route(world, length, rng, options); break;
      case MotionTemplate::kTurn: route = turn_route(world, length, rng, options); break;
      case MotionTemplate::kRoute: route = graph_route(world, *graph, length, rng, options); break;
    }
    if (!route) continue;
    EpisodeRecord ep = scripted_expert(world, *route, seed);
    switch (kind) {
      case MotionTemplate::kStraight: ep.scenario = Scenario::kOther; break;
      case MotionTemplate::kTurn: ep.scenario = Scenario::kTurn; break;
      case MotionTemplate::kRoute: ep.scenario = classify(world, ep, *route); break;
    }
    return ep;
  }
  throw GenerationError("no path for the requested template fits world " + std::to_string(world.seed) + " after " +
                        std::to_string(options.max_attempts) + " attempts");
}

Dataset generate_dataset(const DatasetOptions& options) {
  if (options.worlds == 0) throw ConfigError("need at least one world");
  Dataset ds;
  for (std::size_t w = 0; w < options.worlds; ++w) {
    ds.worlds.push_back(generate_world(hash_combine({options.seed, w, 0x574f524cULL}), options.world));
  }
  for (std::size_t i = 0; i < options.episodes; ++i) {
    const std::size_t w = i % options.worlds;
    EpisodeRecord ep = generate_synthetic_episode(hash_combine({options.seed, i}), ds.worlds[w], options.length_s,
                                                  static_cast<MotionTemplate>(i % 3), options.generator);
    ep.world_index = static_cast<std::uint32_t>(w);
    ds.episodes.push_back(std::move(ep));
  }
  return ds;
}

}  // namespace sw
