#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "episodes/episode.hpp"
#include "nav/graph.hpp"

namespace sw {

enum class MotionTemplate { kStraight, kTurn, kRoute };

struct GeneratorOptions {
  std::size_t context_n = 5;
  double clearance_m = 1.2;
  double border_m = 2.0;
  int max_attempts = 400;
  // Turn template: heading change drawn from this range, either direction.
  double min_turn_deg = 75.0;
  double max_turn_deg = 110.0;
};

// Walks one motion template through `world` with the scripted expert.
// Straight paths are tagged "other", turns "turn"; graph routes are
// classified by what they pass (agents, detours, tight clearance).
// Throws ValidationError when length_s < 2 * context_n and GenerationError
// when no path of the template fits the world.
EpisodeRecord generate_synthetic_episode(std::uint64_t seed, const World& world, double length_s,
                                         std::optional<MotionTemplate> motion = std::nullopt,
                                         const GeneratorOptions& options = {});

struct Dataset {
  std::vector<World> worlds;
  std::vector<EpisodeRecord> episodes;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetOptions {
  std::size_t episodes = 8;
  double length_s = 20.0;
  std::uint64_t seed = 1;
  std::size_t worlds = 2;
  WorldOptions world;
  GeneratorOptions generator;
};

// Episode i uses world i % worlds and template i % 3.
Dataset generate_dataset(const DatasetOptions& options);

// Largest |heading_t - heading_0| over the episode, radians.
double max_heading_change(const EpisodeRecord& ep);

}  // namespace sw
