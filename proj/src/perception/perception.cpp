#include "perception/perception.hpp"

#include <cmath>

#include "common/error.hpp"

namespace sw {

void PerceptionConfig::validate() const {
  if (grid_h == 0 || grid_w == 0) throw ConfigError("patch grid must be at least 1x1");
  if (appearance_dim == 0) throw ConfigError("appearance_dim must be positive");
  if (depth_dim == 0) throw ConfigError("depth_dim must be positive");
  if (patch_px == 0) throw ConfigError("patch_px must be positive");
  if (num_tracks == 0) throw ConfigError("num_tracks must be positive");
  if (!(min_disparity_px > 0.0)) throw ConfigError("min_disparity_px must be positive");
}

PerceptionConfig PerceptionConfig::full() {
  PerceptionConfig c;
  c.patch_px = 14;
  c.grid_h = patch_grid_extent(350, c.patch_px);
  c.grid_w = patch_grid_extent(350, c.patch_px);
  c.appearance_dim = 768;
  c.depth_dim = 64;
  return c;
}

std::size_t patch_grid_extent(std::size_t image_px, std::size_t patch_px) {
  if (patch_px == 0 || image_px == 0 || image_px % patch_px != 0) {
    throw ConfigError("image side " + std::to_string(image_px) + " px is not a multiple of patch size " +
                      std::to_string(patch_px));
  }
  return image_px / patch_px;
}

DepthMap disparity_to_depth(const DisparityMap& disparity, double focal_px, double baseline_m,
                            double min_disparity_px) {
  if (!(focal_px > 0.0)) throw ValidationError("focal_px", "must be positive");
  if (!(baseline_m > 0.0)) throw ValidationError("baseline_m", "must be positive");
  if (disparity.d.size() != disparity.grid_h * disparity.grid_w) {
    throw DimensionError("disparity map holds " + std::to_string(disparity.d.size()) + " values for a " +
                         std::to_string(disparity.grid_h) + "x" + std::to_string(disparity.grid_w) + " grid");
  }
  DepthMap out{disparity.grid_h, disparity.grid_w, {}};
  out.z.reserve(disparity.d.size());
  const double fb = focal_px * baseline_m;
  for (std::size_t i = 0; i < disparity.d.size(); ++i) {
    const double d = disparity.d[i];
    if (!(d > min_disparity_px)) throw DegenerateDisparityError(i / disparity.grid_w, i % disparity.grid_w, d);
    out.z.push_back(fb / d);
  }
  return out;
}

DepthMap depth_source(const FeatureProvider& provider, DepthMode mode, const FrameObservation& frame,
                      std::size_t grid_h, std::size_t grid_w, double min_disparity_px) {
  if (mode == DepthMode::kMonocular) return provider.monocular_depth(frame, grid_h, grid_w);
  if (!frame.is_stereo()) throw ConfigError("stereo depth requested for a frame without a right view");
  if (!(frame.baseline_m > 0.0)) throw ConfigError("stereo depth requested for a frame without a baseline");
  return disparity_to_depth(provider.disparity(frame, grid_h, grid_w), frame.focal_px, frame.baseline_m,
                            min_disparity_px);
}

Tensor depth_features(const DepthMap& depth) {
  Tensor t(Shape{depth.grid_h * depth.grid_w, 2});
  for (std::size_t i = 0; i < depth.z.size(); ++i) {
    const double z = depth.z[i];
    if (!(z > 0.0) || !std::isfinite(z)) {
      throw ValidationError("depth[" + std::to_string(i / depth.grid_w) + "][" + std::to_string(i % depth.grid_w) +
                                "]",
                            "depth must be positive and finite");
    }
    t.at(i, 0) = std::log(z);
    t.at(i, 1) = 1.0 / z;
  }
  return t;
}

DepthEncoder make_depth_encoder(ParamStore& store, const std::string& name, std::size_t depth_dim, SplitMix& rng) {
  return {make_linear(store, name + ".proj", 2, depth_dim, rng)};
}

Var encode_depth(Params p, const DepthEncoder& enc, const DepthMap& depth) {
  Tape& tape = p[enc.proj.weight].tape();
  return apply(p, enc.proj, tape.constant(depth_features(depth)));
}

PatchTokenGrid assemble_tokens(const FeatureGrid& x, const FeatureGrid& z, bool use_depth) {
  if (x.grid_h != z.grid_h || x.grid_w != z.grid_w) {
    throw DimensionError("appearance grid " + std::to_string(x.grid_h) + "x" + std::to_string(x.grid_w) +
                         " does not match depth grid " + std::to_string(z.grid_h) + "x" + std::to_string(z.grid_w));
  }
  PatchTokenGrid out{x.grid_h, x.grid_w, x.dim, z.dim, Tensor(Shape{x.grid_h * x.grid_w, x.dim + z.dim})};
  double* dst = out.tokens.data();
  for (std::size_t i = 0; i < x.grid_h * x.grid_w; ++i) {
    for (std::size_t c = 0; c < x.dim; ++c) *dst++ = x.values[i * x.dim + c];
    for (std::size_t c = 0; c < z.dim; ++c) *dst++ = use_depth ? z.values[i * z.dim + c] : 0.0;
  }
  return out;
}

Var assemble_tokens(Var x, Var z, bool use_depth) {
  if (x.value().rows() != z.value().rows()) {
    throw DimensionError("appearance rows " + std::to_string(x.value().rows()) + " != depth rows " +
                         std::to_string(z.value().rows()));
  }
  if (!use_depth) z = x.tape().constant(Tensor::zeros_like(z.value()));
  return concat_cols(x, z);
}

WindowPerception perceive(const FeatureProvider& provider, const PerceptionConfig& config,
                          std::span<const FrameObservation> window) {
  config.validate();
  WindowPerception out;
  out.appearance.reserve(window.size());
  out.depth.reserve(window.size());
  for (const FrameObservation& f : window) {
    f.validate();
    out.appearance.push_back(provider.appearance(f, config.grid_h, config.grid_w, config.appearance_dim));
    out.depth.push_back(
        depth_source(provider, config.mode, f, config.grid_h, config.grid_w, config.min_disparity_px));
  }
  out.tracks = provider.tracks(window, config.grid_h, config.grid_w, config.num_tracks);
  out.tracks.validate();
  return out;
}

}  // namespace sw
