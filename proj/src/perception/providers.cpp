#include "perception/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string_view>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"

namespace sw {
namespace {

constexpr std::uint64_t kAppearanceSalt = 0xa11ce;
constexpr std::uint64_t kDepthSalt = 0xde97;
constexpr std::uint64_t kClassSalt = 0xc1a55;

DisparityMap disparity_from_depth(const DepthMap& depth, const FrameObservation& frame) {
  DisparityMap out{depth.grid_h, depth.grid_w, {}};
  out.d.reserve(depth.z.size());
  for (double z : depth.z) out.d.push_back(frame.focal_px * frame.baseline_m / z);
  return out;
}

std::int64_t cell_of(double v) { return static_cast<std::int64_t>(std::floor(v)); }

}  // namespace

std::vector<Vec2> track_query_points(std::size_t count, std::size_t grid_h, std::size_t grid_w) {
  std::vector<Vec2> out;
  if (count == 0) return out;
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
  const std::size_t rows = (count + side - 1) / side;
  const auto lin = [](std::size_t i, std::size_t n, std::size_t extent) {
    if (n <= 1) return (static_cast<double>(extent) - 1.0) / 2.0;
    return static_cast<double>(i) * (static_cast<double>(extent) - 1.0) / static_cast<double>(n - 1);
  };
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back({lin(i % side, side, grid_w), lin(i / side, rows, grid_h)});
  }
  return out;
}

// ---- ProceduralProvider ----------------------------------------------------

FeatureGrid ProceduralProvider::appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                                           std::size_t dim) const {
  FeatureGrid g{grid_h, grid_w, dim, {}};
  g.values.reserve(grid_h * grid_w * dim);
  for (std::size_t j = 0; j < grid_h; ++j) {
    for (std::size_t k = 0; k < grid_w; ++k) {
      SplitMix rng(hash_combine({kAppearanceSalt, frame.left.seed, j, k}));
      for (std::size_t c = 0; c < dim; ++c) g.values.push_back(rng.normal());
    }
  }
  return g;
}

DepthMap ProceduralProvider::monocular_depth(const FrameObservation& frame, std::size_t grid_h,
                                             std::size_t grid_w) const {
  SplitMix rng(hash_combine({kDepthSalt, frame.left.seed}));
  const double a = rng.uniform(0.2, 1.2), b = rng.uniform(0.2, 1.2), phase = rng.uniform(0.0, 6.283);
  DepthMap m{grid_h, grid_w, {}};
  m.z.reserve(grid_h * grid_w);
  for (std::size_t j = 0; j < grid_h; ++j)
    for (std::size_t k = 0; k < grid_w; ++k)
      m.z.push_back(1.0 + 14.5 * (1.0 + std::sin(a * static_cast<double>(j) + b * static_cast<double>(k) + phase)));
  return m;
}

DisparityMap ProceduralProvider::disparity(const FrameObservation& frame, std::size_t grid_h,
                                           std::size_t grid_w) const {
  return disparity_from_depth(monocular_depth(frame, grid_h, grid_w), frame);
}

TrackSet ProceduralProvider::tracks(std::span<const FrameObservation> window, std::size_t grid_h,
                                    std::size_t grid_w, std::size_t count) const {
  TrackSet set{window.size(), grid_h, grid_w, {}};
  for (Vec2 q : track_query_points(count, grid_h, grid_w)) {
    set.tracks.emplace_back(window.size(), TrackPoint{q, true});
  }
  return set;
}

// ---- SceneProvider ---------------------------------------------------------

SceneProvider::SceneProvider(std::shared_ptr<const World> world, CameraModel camera)
    : world_(std::move(world)), camera_(camera) {
  if (!world_) throw ConfigError("scene provider needs a world");
}

SceneProvider::Hit SceneProvider::cast(const ProviderInput& view, double u, double v) const {
  // Ego-frame ray (1, -u): forward component 1, so the parameter along it is
  // the optical-axis depth.
  const Vec2 ego_dir{1.0, -u};
  const double len = ego_dir.norm();
  const Vec2 dir = from_ego(Pose2{{0, 0}, view.pose.heading}, ego_dir) * (1.0 / len);
  const Vec2 origin = view.pose.position;

  Hit best;
  best.depth = camera_.max_range_m;
  best.kind = 0;
  const auto consider = [&](double unit_t, int kind, std::size_t index, double top) {
    const double z = unit_t / len;
    if (z <= 0.0 || z >= best.depth) return;
    const double h = camera_.height_m + v * z;
    if (h < 0.0 || h > top) return;
    best = Hit{z, kind, index, origin + dir * unit_t, h};
  };
  for (std::size_t i = 0; i < world_->obstacles.size(); ++i) {
    if (auto t = ray_polygon_hit(origin, dir, world_->obstacles[i])) consider(*t, 2, i, camera_.obstacle_height_m);
  }
  for (std::size_t i = 0; i < world_->agents.size(); ++i) {
    const MovingAgent& a = world_->agents[i];
    if (auto t = ray_circle_hit(origin, dir, a.position_at(view.time_s), a.radius)) {
      consider(*t, 3, i, camera_.agent_height_m);
    }
  }
  if (v < 0.0) {
    const double z = camera_.height_m / -v;
    if (z < best.depth) best = Hit{z, 1, 0, origin + dir * (z * len), 0.0};
  }
  if (best.kind == 0) {
    best.point = origin + dir * (best.depth * len);
    best.height = camera_.height_m + v * best.depth;
  }
  return best;
}

namespace {

struct ImageCoords {
  double tan_h, tan_v;
  std::size_t grid_h, grid_w;

  // Patch coordinates (x = col, y = row) to normalized (u right, v up).
  double u_of(double x) const { return ((x + 0.5) / static_cast<double>(grid_w) * 2.0 - 1.0) * tan_h; }
  double v_of(double y) const { return (1.0 - (y + 0.5) / static_cast<double>(grid_h) * 2.0) * tan_v; }
  double x_of(double u) const { return (u / tan_h + 1.0) / 2.0 * static_cast<double>(grid_w) - 0.5; }
  double y_of(double v) const { return (1.0 - v / tan_v) / 2.0 * static_cast<double>(grid_h) - 0.5; }
};

ImageCoords coords_for(const CameraModel& cam, std::size_t grid_h, std::size_t grid_w) {
  return {std::tan(deg_to_rad(cam.hfov_deg) / 2.0), std::tan(deg_to_rad(cam.vfov_deg) / 2.0), grid_h, grid_w};
}

}  // namespace

FeatureGrid SceneProvider::appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                                      std::size_t dim) const {
  const ImageCoords ic = coords_for(camera_, grid_h, grid_w);
  FeatureGrid g{grid_h, grid_w, dim, {}};
  g.values.reserve(grid_h * grid_w * dim);
  for (std::size_t j = 0; j < grid_h; ++j) {
    for (std::size_t k = 0; k < grid_w; ++k) {
      const Hit hit = cast(frame.left, ic.u_of(static_cast<double>(k)), ic.v_of(static_cast<double>(j)));
      // Class signature shared by every surface of a kind, plus a texture
      // term tied to the hit surface and a 1 m cell on it.
      SplitMix cls(hash_combine({kClassSalt, static_cast<std::uint64_t>(hit.kind)}));
      std::uint64_t texture_key = 0;
      if (hit.kind == 1 || hit.kind == 2) {
        texture_key = hash_combine({world_->seed, static_cast<std::uint64_t>(hit.kind), hit.index,
                                    static_cast<std::uint64_t>(cell_of(hit.point.x)),
                                    static_cast<std::uint64_t>(cell_of(hit.point.y)),
                                    static_cast<std::uint64_t>(cell_of(hit.height))});
      } else if (hit.kind == 3) {
        texture_key = hash_combine({world_->seed, 3, hit.index});
      } else {
        texture_key = hash_combine({world_->seed, 0, static_cast<std::uint64_t>(cell_of(rad_to_deg(
                                                         std::atan2(hit.point.y - frame.left.pose.position.y,
                                                                    hit.point.x - frame.left.pose.position.x)) /
                                                                                   15.0))});
      }
      SplitMix tex(texture_key);
      for (std::size_t c = 0; c < dim; ++c) g.values.push_back(cls.normal() + 0.5 * tex.normal());
    }
  }
  return g;
}

DepthMap SceneProvider::monocular_depth(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const {
  const ImageCoords ic = coords_for(camera_, grid_h, grid_w);
  DepthMap m{grid_h, grid_w, {}};
  m.z.reserve(grid_h * grid_w);
  for (std::size_t j = 0; j < grid_h; ++j)
    for (std::size_t k = 0; k < grid_w; ++k)
      m.z.push_back(cast(frame.left, ic.u_of(static_cast<double>(k)), ic.v_of(static_cast<double>(j))).depth);
  return m;
}

DisparityMap SceneProvider::disparity(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const {
  return disparity_from_depth(monocular_depth(frame, grid_h, grid_w), frame);
}

TrackSet SceneProvider::tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                               std::size_t count) const {
  TrackSet set{window.size(), grid_h, grid_w, {}};
  if (window.empty()) {
    set.tracks.assign(count, {});
    return set;
  }
  const ImageCoords ic = coords_for(camera_, grid_h, grid_w);
  const ProviderInput& first = window.front().left;
  for (Vec2 q : track_query_points(count, grid_h, grid_w)) {
    const Hit hit = cast(first, ic.u_of(q.x), ic.v_of(q.y));
    std::vector<TrackPoint> track;
    track.reserve(window.size());
    for (const FrameObservation& f : window) {
      const Vec2 ego = to_ego(f.left.pose, hit.point);
      TrackPoint p;
      if (ego.x < camera_.min_track_depth_m) {
        p.position = q;
        p.visible = false;
      } else {
        const double x = ic.x_of(-ego.y / ego.x);
        const double y = ic.y_of((hit.height - camera_.height_m) / ego.x);
        const double cx = std::clamp(x, 0.0, static_cast<double>(grid_w) - 1.0);
        const double cy = std::clamp(y, 0.0, static_cast<double>(grid_h) - 1.0);
        p.position = {cx, cy};
        p.visible = cx == x && cy == y;
      }
      track.push_back(p);
    }
    set.tracks.push_back(std::move(track));
  }
  return set;
}

// ---- FlowTrackProvider -----------------------------------------------------

FlowTrackProvider::FlowTrackProvider(std::shared_ptr<const FeatureProvider> base, FlowField flow)
    : base_(std::move(base)), flow_(std::move(flow)) {
  if (!base_) throw ConfigError("flow track provider needs a base provider");
}

TrackSet FlowTrackProvider::tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                                   std::size_t count) const {
  TrackSet set{window.size(), grid_h, grid_w, {}};
  const auto inside = [&](Vec2 p) {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= static_cast<double>(grid_w) - 1.0 &&
           p.y <= static_cast<double>(grid_h) - 1.0;
  };
  for (Vec2 p : track_query_points(count, grid_h, grid_w)) {
    std::vector<TrackPoint> track;
    for (std::size_t i = 0; i < window.size(); ++i) {
      if (i > 0) p = p + flow_(i - 1, p);
      track.push_back({p, inside(p)});
    }
    set.tracks.push_back(std::move(track));
  }
  return set;
}

// ---- Feature files ---------------------------------------------------------

namespace {
constexpr std::string_view kSwftMagic = "SWFT";
constexpr std::uint32_t kSwftVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file) {
  ByteWriter w;
  w.raw(kSwftMagic);
  w.u32(kSwftVersion);
  w.u32(static_cast<std::uint32_t>(file.grid_h));
  w.u32(static_cast<std::uint32_t>(file.grid_w));
  w.u32(static_cast<std::uint32_t>(file.dim));
  w.u32(static_cast<std::uint32_t>(file.frames.size()));
  const std::size_t per_frame = file.grid_h * file.grid_w * file.dim;
  for (const FeatureGrid& g : file.frames) {
    if (g.grid_h != file.grid_h || g.grid_w != file.grid_w || g.dim != file.dim || g.values.size() != per_frame) {
      throw DimensionError("feature file frame shape does not match the header");
    }
    for (double v : g.values) w.f64(v);
  }
  return w.take();
}

FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kSwftMagic);
  const std::size_t version_at = r.offset();
  if (r.u32() != kSwftVersion) throw FormatError("unsupported SWFT version", version_at);
  FeatureFile file;
  file.grid_h = r.u32();
  file.grid_w = r.u32();
  file.dim = r.u32();
  const std::uint32_t frames = r.u32();
  const std::size_t per_frame = file.grid_h * file.grid_w * file.dim;
  if (per_frame > 0 && r.remaining() / 8 / per_frame < frames) {
    throw FormatError("SWFT payload shorter than its header declares", r.offset());
  }
  file.frames.reserve(frames);
  for (std::uint32_t f = 0; f < frames; ++f) {
    FeatureGrid g{file.grid_h, file.grid_w, file.dim, {}};
    g.values.resize(per_frame);
    for (double& v : g.values) v = r.f64();
    file.frames.push_back(std::move(g));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after SWFT payload", r.offset());
  return file;
}

void save_feature_file(const std::string& path, const FeatureFile& file) {
  write_file_atomic(path, encode_feature_file(file));
}

FeatureFile load_feature_file(const std::string& path) { return decode_feature_file(read_file_bytes(path)); }

// ---- FileProvider ----------------------------------------------------------

FileProvider::FileProvider(FeatureFile appearance, std::optional<FeatureFile> depth,
                           std::shared_ptr<const FeatureProvider> fallback)
    : appearance_(std::move(appearance)), depth_(std::move(depth)), fallback_(std::move(fallback)) {
  if (depth_ && depth_->dim != 1) throw DimensionError("depth feature file must have dim 1");
  if (!depth_ && !fallback_) throw ConfigError("file provider without a depth file needs a fallback provider");
}

const FeatureGrid& FileProvider::frame_of(const FeatureFile& file, const FrameObservation& frame) const {
  if (frame.frame_id < 0 || static_cast<std::size_t>(frame.frame_id) >= file.frames.size()) {
    throw ValidationError("frame_id", "frame " + std::to_string(frame.frame_id) + " not in feature file of " +
                                          std::to_string(file.frames.size()) + " frames");
  }
  return file.frames[static_cast<std::size_t>(frame.frame_id)];
}

FeatureGrid FileProvider::appearance(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w,
                                     std::size_t dim) const {
  if (appearance_.grid_h != grid_h || appearance_.grid_w != grid_w || appearance_.dim != dim) {
    throw DimensionError("feature file holds " + std::to_string(appearance_.grid_h) + "x" +
                         std::to_string(appearance_.grid_w) + "x" + std::to_string(appearance_.dim) +
                         " grids, requested " + std::to_string(grid_h) + "x" + std::to_string(grid_w) + "x" +
                         std::to_string(dim));
  }
  return frame_of(appearance_, frame);
}

DepthMap FileProvider::monocular_depth(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const {
  if (!depth_) return fallback_->monocular_depth(frame, grid_h, grid_w);
  if (depth_->grid_h != grid_h || depth_->grid_w != grid_w) throw DimensionError("depth file grid mismatch");
  return DepthMap{grid_h, grid_w, frame_of(*depth_, frame).values};
}

DisparityMap FileProvider::disparity(const FrameObservation& frame, std::size_t grid_h, std::size_t grid_w) const {
  if (!depth_) return fallback_->disparity(frame, grid_h, grid_w);
  return disparity_from_depth(monocular_depth(frame, grid_h, grid_w), frame);
}

TrackSet FileProvider::tracks(std::span<const FrameObservation> window, std::size_t grid_h, std::size_t grid_w,
                              std::size_t count) const {
  if (fallback_) return fallback_->tracks(window, grid_h, grid_w, count);
  return ProceduralProvider{}.tracks(window, grid_h, grid_w, count);
}

}  // namespace sw
