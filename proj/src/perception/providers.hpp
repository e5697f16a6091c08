#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nav/world.hpp"
#include "perception/types.hpp"

namespace sw {

// Stand-in for the frozen encoders. Implementations must be pure: identical
// arguments give bitwise-identical results.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;

  virtual FeatureGrid appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                                 std::size_t dim) const = 0;
  virtual DepthMap monocular_depth(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const = 0;
  virtual DisparityMap disparity(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const = 0;
  virtual TrackSet tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                          std::size_t count) const = 0;
};

// Query points laid out on a regular lattice spanning [0, w-1] x [0, h-1].
std::vector<Vec2> track_query_points(std::size_t count, std::size_t grid_h, std::size_t grid_w);

// Features hashed from the left-view seed only. Depth is a smooth random
// field in [1, 30] m, disparity is exactly f*B/Z of that field, and tracks
// stay at their query points.
class ProceduralProvider final : public FeatureProvider {
 public:
  FeatureGrid appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                         std::size_t dim) const override;
  DepthMap monocular_depth(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override;
  DisparityMap disparity(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override;
  TrackSet tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                  std::size_t count) const override;
};

struct CameraModel {
  double hfov_deg = 90.0;
  double vfov_deg = 60.0;
  double height_m = 1.2;
  double max_range_m = 30.0;
  double obstacle_height_m = 2.5;
  double agent_height_m = 1.8;
  double min_track_depth_m = 0.1;
};

// Ray-casts a pinhole camera mounted on the robot through a World. The
// rendered view depends on (world, pose, time), so frames along a path are
// mutually consistent and tracks follow real scene points.
class SceneProvider final : public FeatureProvider {
 public:
  explicit SceneProvider(std::shared_ptr<const World> world, CameraModel camera = {});

  FeatureGrid appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                         std::size_t dim) const override;
  DepthMap monocular_depth(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override;
  DisparityMap disparity(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override;
  TrackSet tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                  std::size_t count) const override;

  struct Hit {
    double depth = 0.0;  // forward (optical-axis) distance
    int kind = 0;        // 0 sky, 1 ground, 2 obstacle, 3 agent
    std::size_t index = 0;
    Vec2 point;
    double height = 0.0;
  };
  // Cast through normalized image coordinates (u right, v up).
  Hit cast(const ProviderInput& view, double u, double v) const;

  const World& world() const { return *world_; }
  const CameraModel& camera() const { return camera_; }

 private:
  std::shared_ptr<const World> world_;
  CameraModel camera_;
};

// Displacement (in patch units) applied to a point between frame i and i+1.
using FlowField = std::function<Vec2(std::size_t frame_index, Vec2 position)>;

// Advects the query lattice through a known flow. Points that leave the grid
// keep their advected position and are flagged invisible. Everything except
// tracks is delegated to `base`.
class FlowTrackProvider final : public FeatureProvider {
 public:
  FlowTrackProvider(std::shared_ptr<const FeatureProvider> base, FlowField flow);

  FeatureGrid appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                         std::size_t dim) const override {
    return base_->appearance(frame, grid_h, grid_w, dim);
  }
  DepthMap monocular_depth(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override {
    return base_->monocular_depth(frame, grid_h, grid_w);
  }
  DisparityMap disparity(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override {
    return base_->disparity(frame, grid_h, grid_w);
  }
  TrackSet tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                  std::size_t count) const override;

 private:
  std::shared_ptr<const FeatureProvider> base_;
  FlowField flow_;
};

// Precomputed per-frame tensors. Frame ids index into the files; the depth
// file (dim 1) is optional, and when absent depth and tracks come from `fallback`.
struct FeatureFile {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t dim = 0;
  std::vector<FeatureGrid> frames;

  friend bool operator==(const FeatureFile&, const FeatureFile&) = default;
};

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file);
FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes);
void save_feature_file(const std::string& path, const FeatureFile& file);
FeatureFile load_feature_file(const std::string& path);

class FileProvider final : public FeatureProvider {
 public:
  FileProvider(FeatureFile appearance, std::optional<FeatureFile> depth,
               std::shared_ptr<const FeatureProvider> fallback);

  FeatureGrid appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                         std::size_t dim) const override;
  DepthMap monocular_depth(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override;
  DisparityMap disparity(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const override;
  TrackSet tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                  std::size_t count) const override;

 private:
  const FeatureGrid& frame_of(const FeatureFile& file, const FrameObservation& frame) const;

  FeatureFile appearance_;
  std::optional<FeatureFile> depth_;
  std::shared_ptr<const FeatureProvider> fallback_;
};

}  // namespace sw
