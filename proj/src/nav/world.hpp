#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common/geometry.hpp"

namespace sw {

struct Rect {
  Vec2 min;
  Vec2 max;
  bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Constant-speed pedestrian walking back and forth along a polyline.
struct MovingAgent {
  std::vector<Vec2> path;
  double speed = 1.0;
  double radius = 0.35;

  Vec2 position_at(double time_s) const;
  friend bool operator==(const MovingAgent&, const MovingAgent&) = default;
};

struct World {
  Rect bounds{{0, 0}, {40, 40}};
  std::vector<Polygon> obstacles;
  std::vector<MovingAgent> agents;
  std::uint64_t seed = 0;

  // Throws ValidationError when an obstacle leaves the bounds or a speed is negative.
  void validate() const;
  friend bool operator==(const World&, const World&) = default;
};

struct WorldOptions {
  double size_m = 40.0;
  int obstacles = 10;
  int agents = 3;
  double min_obstacle_half = 0.8;
  double max_obstacle_half = 2.5;
};

World generate_world(std::uint64_t seed, const WorldOptions& options = {});

std::string world_to_json(const World& world);
World world_from_json(const std::string& text);
void save_world(const std::string& path, const World& world);
World load_world(const std::string& path);

}  // namespace sw
