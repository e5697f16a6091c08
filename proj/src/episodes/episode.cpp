#include "episodes/episode.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace sw {

void EpisodeRecord::validate() const {
  const std::size_t n = positions.size();
  if (frames.size() != n) throw ValidationError("frames", "count differs from positions");
  if (headings.size() != n) throw ValidationError("headings", "count differs from positions");
  if (timestamps.size() != n) throw ValidationError("timestamps", "count differs from positions");
  for (std::size_t i = 1; i < n; ++i) {
    if (timestamps[i] - timestamps[i - 1] != 1.0) {
      throw ValidationError("timestamps[" + std::to_string(i) + "]", "not 1 s after the previous timestamp");
    }
  }
}

std::vector<FrameObservation> frames_for_path(std::uint64_t seed, const std::vector<Vec2>& positions,
                                              const std::vector<double>& headings,
                                              const std::vector<double>& timestamps, const StereoRig& rig) {
  std::vector<FrameObservation> frames;
  frames.reserve(positions.size());
  for (std::size_t t = 0; t < positions.size(); ++t) {
    FrameObservation f;
    f.frame_id = static_cast<std::int64_t>(t);
    f.focal_px = rig.focal_px;
    f.baseline_m = rig.baseline_m;
    f.left = {hash_combine({seed, t, 0}), {positions[t], headings[t]}, timestamps[t]};
    const Vec2 right_offset{std::sin(headings[t]) * rig.baseline_m, -std::cos(headings[t]) * rig.baseline_m};
    f.right = ProviderInput{hash_combine({seed, t, 1}), {positions[t] + right_offset, headings[t]}, timestamps[t]};
    frames.push_back(f);
  }
  return frames;
}

}  // namespace sw
