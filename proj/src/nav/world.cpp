#include "nav/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"

namespace sw {

Vec2 MovingAgent::position_at(double time_s) const {
  if (path.empty()) return {};
  if (path.size() == 1 || speed <= 0.0) return path.front();
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += distance(path[i - 1], path[i]);
  if (total <= 0.0) return path.front();
  double s = std::fmod(speed * time_s, 2.0 * total);
  if (s < 0.0) s += 2.0 * total;
  if (s > total) s = 2.0 * total - s;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double seg = distance(path[i - 1], path[i]);
    if (s <= seg && seg > 0.0) return path[i - 1] + (s / seg) * (path[i] - path[i - 1]);
    s -= seg;
  }
  return path.back();
}

void World::validate() const {
  if (!(bounds.max.x > bounds.min.x && bounds.max.y > bounds.min.y)) {
    throw ValidationError("bounds", "empty rectangle");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (obstacles[i].vertices.size() < 3) {
      throw ValidationError("obstacles[" + std::to_string(i) + "]", "needs at least 3 vertices");
    }
    for (const Vec2& v : obstacles[i].vertices) {
      if (!bounds.contains(v)) throw ValidationError("obstacles[" + std::to_string(i) + "]", "vertex outside bounds");
    }
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].speed < 0.0) throw ValidationError("agents[" + std::to_string(i) + "].speed", "negative speed");
    if (agents[i].path.empty()) throw ValidationError("agents[" + std::to_string(i) + "].path", "empty path");
  }
}

World generate_world(std::uint64_t seed, const WorldOptions& options) {
  SplitMix rng(hash_combine({seed, 0x574f524c44ULL}));
  World w;
  w.seed = seed;
  w.bounds = {{0, 0}, {options.size_m, options.size_m}};
  const double margin = 3.0;
  int attempts = 0;
  while (static_cast<int>(w.obstacles.size()) < options.obstacles && attempts++ < options.obstacles * 50) {
    const double hw = rng.uniform(options.min_obstacle_half, options.max_obstacle_half);
    const double hh = rng.uniform(options.min_obstacle_half, options.max_obstacle_half);
    const Vec2 c{rng.uniform(margin + hw, options.size_m - margin - hw), rng.uniform(margin + hh, options.size_m - margin - hh)};
    const Polygon poly = make_rectangle(c, hw, hh, rng.uniform(0.0, std::numbers::pi / 2));
    bool inside = true;
    for (const Vec2& v : poly.vertices) inside = inside && w.bounds.contains(v);
    if (!inside) continue;
    // Keep walkable gaps between obstacles.
    bool clear = true;
    for (const Polygon& other : w.obstacles) {
      for (std::size_t i = 0; i < poly.vertices.size() && clear; ++i) {
        const Vec2 a = poly.vertices[i], b = poly.vertices[(i + 1) % poly.vertices.size()];
        if (segment_polygon_distance(a, b, other) < 3.0) clear = false;
      }
    }
    if (clear) w.obstacles.push_back(poly);
  }
  for (int i = 0; i < options.agents; ++i) {
    MovingAgent a;
    const Vec2 start{rng.uniform(2.0, options.size_m - 2.0), rng.uniform(2.0, options.size_m - 2.0)};
    const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double len = rng.uniform(4.0, 12.0);
    Vec2 end = start + len * Vec2{std::cos(dir), std::sin(dir)};
    end.x = std::clamp(end.x, 1.0, options.size_m - 1.0);
    end.y = std::clamp(end.y, 1.0, options.size_m - 1.0);
    a.path = {start, end};
    a.speed = rng.uniform(0.5, 1.4);
    w.agents.push_back(a);
  }
  return w;
}

namespace {

nlohmann::json vec_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

Vec2 json_vec(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(field, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string world_to_json(const World& world) {
  nlohmann::json j;
  j["format"] = "swnav-world";
  j["version"] = 1;
  j["seed"] = world.seed;
  j["bounds"] = {vec_json(world.bounds.min), vec_json(world.bounds.max)};
  j["obstacles"] = nlohmann::json::array();
  for (const Polygon& p : world.obstacles) {
    nlohmann::json poly = nlohmann::json::array();
    for (const Vec2& v : p.vertices) poly.push_back(vec_json(v));
    j["obstacles"].push_back(poly);
  }
  j["agents"] = nlohmann::json::array();
  for (const MovingAgent& a : world.agents) {
    nlohmann::json path = nlohmann::json::array();
    for (const Vec2& v : a.path) path.push_back(vec_json(v));
    j["agents"].push_back({{"path", path}, {"speed", a.speed}, {"radius", a.radius}});
  }
  return j.dump(2);
}

World world_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("world JSON: ") + e.what(), e.byte);
  }
  World w;
  try {
    w.seed = j.value("seed", std::uint64_t{0});
    const auto& b = j.at("bounds");
    w.bounds = {json_vec(b.at(0), "bounds[0]"), json_vec(b.at(1), "bounds[1]")};
    for (std::size_t i = 0; i < j.at("obstacles").size(); ++i) {
      Polygon p;
      for (const auto& v : j["obstacles"][i]) p.vertices.push_back(json_vec(v, "obstacles[" + std::to_string(i) + "]"));
      w.obstacles.push_back(std::move(p));
    }
    if (j.contains("agents")) {
      for (const auto& a : j["agents"]) {
        MovingAgent m;
        for (const auto& v : a.at("path")) m.path.push_back(json_vec(v, "agents.path"));
        m.speed = a.at("speed").get<double>();
        m.radius = a.value("radius", 0.35);
        w.agents.push_back(std::move(m));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("world", e.what());
  }
  w.validate();
  return w;
}

void save_world(const std::string& path, const World& world) { write_text_atomic(path, world_to_json(world)); }

World load_world(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return world_from_json(std::string(bytes.begin(), bytes.end()));
}

}  // namespace sw
