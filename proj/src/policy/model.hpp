#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "perception/perception.hpp"
#include "policy/config.hpp"
#include "tracking/track_attention.hpp"

namespace sw {

// The N most recent frames and ego-frame positions (current pose at the
// origin, heading along +x) plus the ego-frame sub-goal.
struct ObservationWindow {
  std::vector<FrameObservation> frames;
  std::vector<Vec2> positions;
  Vec2 subgoal;

  // Throws ValidationError naming the offending field.
  void validate(std::size_t context_n) const;
};

// A window after the frozen encoders have run. Training caches these.
struct ModelInput {
  WindowPerception perception;
  std::vector<Vec2> positions;
  Vec2 subgoal;
};

ModelInput prepare_input(const FeatureProvider& provider, const ModelConfig& config, const ObservationWindow& window);

struct PolicyOutput {
  std::vector<Vec2> waypoints;  // horizon entries, ego frame, meters
  double arrival_prob = 0.0;
};

// Differentiable outputs of one forward pass.
struct ForwardVars {
  Var waypoints;  // [horizon x 2]
  Var arrival;    // [1 x 1], after the sigmoid
};

class PolicyModel {
 public:
  explicit PolicyModel(ModelConfig config, std::uint64_t init_seed = 0);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // Fused tokens for all frames, [N*grid_h*grid_w x d], after the
  // tracking-guided layers when enabled.
  Var image_tokens(Params p, const ModelInput& input) const;
  // [N x d]
  Var encode_trajectory(Params p, std::span<const Vec2> positions) const;
  // [1 x d]
  Var encode_target(Params p, Vec2 subgoal) const;
  // Frame embeddings, optional pooling, then the global blocks over
  // [image tokens; trajectory tokens].
  Var global_attention(Params p, Var image_tokens, Var trajectory_tokens) const;
  // Appends g and returns the updated target row, [1 x d].
  Var target_attention(Params p, Var global_tokens, Var target_token) const;
  ForwardVars heads(Params p, Var target_row) const;

  ForwardVars forward(Params p, const ModelInput& input) const;
  PolicyOutput predict(const ModelInput& input) const;
  PolicyOutput predict(const FeatureProvider& provider, const ObservationWindow& window) const;

 private:
  struct Layout {
    DepthEncoder depth;
    std::vector<TrackAttentionLayer> track;
    std::size_t frame_embed = 0;
    MlpParams trajectory;
    MlpParams target;
    std::vector<TransformerBlock> global;
    std::vector<TransformerBlock> target_blocks;
    LayerNormParams final_ln;
    MlpParams trunk;
    LinearLayer arrival;
    LinearLayer action;
  };

  ModelConfig config_;
  ParamStore store_;
  Layout layout_;
};

PolicyOutput to_output(const ForwardVars& vars);

}  // namespace sw
