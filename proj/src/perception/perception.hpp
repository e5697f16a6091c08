#pragma once

#include <span>
#include <string>
#include <vector>

#include "perception/providers.hpp"
#include "tensor/layers.hpp"

namespace sw {

struct PerceptionConfig {
  std::size_t grid_h = 8;
  std::size_t grid_w = 8;
  std::size_t appearance_dim = 32;
  std::size_t depth_dim = 8;
  std::size_t patch_px = 14;
  std::size_t num_tracks = 64;
  double min_disparity_px = 1e-3;
  DepthMode mode = DepthMode::kMonocular;

  std::size_t token_dim() const { return appearance_dim + depth_dim; }
  std::size_t image_h() const { return grid_h * patch_px; }
  std::size_t image_w() const { return grid_w * patch_px; }
  void validate() const;

  static PerceptionConfig desk() { return {}; }
  static PerceptionConfig full();
};

// Number of whole patches along one image side; throws ConfigError when the
// side is not a multiple of the patch size.
std::size_t patch_grid_extent(std::size_t image_px, std::size_t patch_px);

// Z = f*B/d per patch. Any d <= min_disparity raises DegenerateDisparityError
// naming the patch.
DepthMap disparity_to_depth(const DisparityMap& disparity, double focal_px, double baseline_m,
                            double min_disparity_px = 1e-3);

DepthMap depth_source(const FeatureProvider& provider, DepthMode mode, const FrameObservation& frame,
                      std::size_t grid_h, std::size_t grid_w, double min_disparity_px = 1e-3);

// Per-patch [log Z, 1/Z]; throws ValidationError on a nonpositive or
// non-finite depth.
Tensor depth_features(const DepthMap& depth);

struct DepthEncoder {
  LinearLayer proj;
};

DepthEncoder make_depth_encoder(ParamStore& store, const std::string& name, std::size_t depth_dim, SplitMix& rng);
// [grid_h*grid_w x depth_dim]
Var encode_depth(Params p, const DepthEncoder& enc, const DepthMap& depth);

struct PatchTokenGrid {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t appearance_dim = 0;
  std::size_t depth_dim = 0;
  Tensor tokens;  // [grid_h*grid_w x appearance_dim + depth_dim]

  std::size_t token_dim() const { return appearance_dim + depth_dim; }
  std::span<const double> token(std::size_t row, std::size_t col) const {
    return {tokens.values().data() + (row * grid_w + col) * token_dim(), token_dim()};
  }
};

// h = [x; z] per patch. With use_depth off, z is replaced by zeros of the
// same width so downstream shapes do not change.
PatchTokenGrid assemble_tokens(const FeatureGrid& x, const FeatureGrid& z, bool use_depth = true);
Var assemble_tokens(Var x, Var z, bool use_depth = true);

// Everything the frozen encoders produce for one window.
struct WindowPerception {
  std::vector<FeatureGrid> appearance;
  std::vector<DepthMap> depth;
  TrackSet tracks;
};

WindowPerception perceive(const FeatureProvider& provider, const PerceptionConfig& config,
                          std::span<const FrameObservation> window);

}  // namespace sw
