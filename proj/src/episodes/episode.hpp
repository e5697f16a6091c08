#pragma once

#include <cstdint>
#include <vector>

#include "common/scenario.hpp"
#include "perception/types.hpp"

namespace sw {

enum class EpisodeSource { kSynthetic = 0, kImported = 1 };

// One demonstration sampled at 1 Hz in world coordinates.
struct EpisodeRecord {
  std::uint64_t episode_id = 0;
  std::uint32_t world_index = 0;  // index into the dataset's worlds
  std::vector<FrameObservation> frames;
  std::vector<Vec2> positions;
  std::vector<double> headings;
  std::vector<double> timestamps;
  Scenario scenario = Scenario::kOther;
  EpisodeSource source = EpisodeSource::kSynthetic;

  std::size_t length() const { return positions.size(); }
  // Equal counts everywhere and timestamps spaced exactly 1 s apart.
  void validate() const;
  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct StereoRig {
  double focal_px = 56.0;
  double baseline_m = 0.12;
};

// Pose-tied frames for a path: left view at the robot pose, right view
// shifted by the baseline to the robot's right.
std::vector<FrameObservation> frames_for_path(std::uint64_t seed, const std::vector<Vec2>& positions,
                                              const std::vector<double>& headings,
                                              const std::vector<double>& timestamps, const StereoRig& rig = {});

}  // namespace sw
