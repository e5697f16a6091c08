#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "common/geometry.hpp"
#include "tensor/tensor.hpp"

namespace sw {

enum class DepthMode { kMonocular, kStereo };

const char* depth_mode_name(DepthMode mode);
DepthMode parse_depth_mode(const std::string& name);

// What a provider needs to render one view. Synthetic providers key their
// output on (seed, pose, time); file-backed providers use the frame id.
struct ProviderInput {
  std::uint64_t seed = 0;
  Pose2 pose;
  double time_s = 0.0;

  friend bool operator==(const ProviderInput&, const ProviderInput&) = default;
};

struct FrameObservation {
  std::int64_t frame_id = 0;
  ProviderInput left;
  std::optional<ProviderInput> right;
  double focal_px = 0.0;
  double baseline_m = 0.0;

  bool is_stereo() const { return right.has_value(); }
  // focal_px > 0 always; stereo frames need baseline_m > 0.
  void validate() const;
  friend bool operator==(const FrameObservation&, const FrameObservation&) = default;
};

// grid_h x grid_w vectors of `dim` reals, row-major over (row, col, channel).
struct FeatureGrid {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> at(std::size_t row, std::size_t col) const {
    return {values.data() + (row * grid_w + col) * dim, dim};
  }
  // [grid_h * grid_w x dim]
  Tensor as_matrix() const;
  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;
};

// Per-patch depth in meters; every entry positive and finite.
struct DepthMap {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::vector<double> z;

  double at(std::size_t row, std::size_t col) const { return z[row * grid_w + col]; }
  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

// Per-patch disparity in pixels.
struct DisparityMap {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::vector<double> d;
};

struct TrackPoint {
  Vec2 position;  // patch coordinates: x = column, y = row
  bool visible = true;
  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

// M tracks, each with exactly one point per window frame.
struct TrackSet {
  std::size_t frames = 0;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::vector<std::vector<TrackPoint>> tracks;

  std::size_t size() const { return tracks.size(); }
  // Throws ValidationError on ragged tracks or visible points outside the grid.
  void validate() const;
  friend bool operator==(const TrackSet&, const TrackSet&) = default;
};

// Patch centers in (x = col, y = row) order, row-major.
std::vector<Vec2> patch_centers(std::size_t grid_h, std::size_t grid_w);

}  // namespace sw
