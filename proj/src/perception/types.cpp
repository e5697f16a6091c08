#include "perception/types.hpp"

#include <string>

#include "common/error.hpp"

namespace sw {

const char* depth_mode_name(DepthMode mode) { return mode == DepthMode::kStereo ? "stereo" : "monocular"; }

DepthMode parse_depth_mode(const std::string& name) {
  if (name == "stereo") return DepthMode::kStereo;
  if (name == "monocular") return DepthMode::kMonocular;
  throw ValidationError("mode", "expected \"monocular\" or \"stereo\", got \"" + name + "\"");
}

void FrameObservation::validate() const {
  if (!(focal_px > 0.0)) throw ValidationError("focal_px", "must be positive");
  if (right && !(baseline_m > 0.0)) throw ValidationError("baseline_m", "stereo frame needs a positive baseline");
}

Tensor FeatureGrid::as_matrix() const { return Tensor(Shape{grid_h * grid_w, dim}, values); }

void TrackSet::validate() const {
  for (std::size_t m = 0; m < tracks.size(); ++m) {
    if (tracks[m].size() != frames) {
      throw ValidationError("tracks[" + std::to_string(m) + "]",
                            "has " + std::to_string(tracks[m].size()) + " points for " + std::to_string(frames) +
                                " frames");
    }
    for (const TrackPoint& p : tracks[m]) {
      if (!p.visible) continue;
      if (p.position.x < 0.0 || p.position.y < 0.0 || p.position.x > static_cast<double>(grid_w) - 1.0 ||
          p.position.y > static_cast<double>(grid_h) - 1.0) {
        throw ValidationError("tracks[" + std::to_string(m) + "]", "visible point outside the patch grid");
      }
    }
  }
}

std::vector<Vec2> patch_centers(std::size_t grid_h, std::size_t grid_w) {
  std::vector<Vec2> out;
  out.reserve(grid_h * grid_w);
  for (std::size_t j = 0; j < grid_h; ++j)
    for (std::size_t k = 0; k < grid_w; ++k) out.push_back({static_cast<double>(k), static_cast<double>(j)});
  return out;
}

}  // namespace sw
