#include "policy/model.hpp"

#include <cmath>

#include "common/error.hpp"

namespace sw {

void ObservationWindow::validate(std::size_t context_n) const {
  if (frames.size() != context_n) {
    throw ValidationError("frames", "expected " + std::to_string(context_n) + " frames, got " +
                                        std::to_string(frames.size()));
  }
  if (positions.size() != context_n) {
    throw ValidationError("positions", "expected " + std::to_string(context_n) + " positions, got " +
                                           std::to_string(positions.size()));
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!std::isfinite(positions[i].x) || !std::isfinite(positions[i].y)) {
      throw ValidationError("positions[" + std::to_string(i) + "]", "must be finite");
    }
  }
  if (!std::isfinite(subgoal.x) || !std::isfinite(subgoal.y)) throw ValidationError("subgoal", "must be finite");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      frames[i].validate();
    } catch (const ValidationError& e) {
      throw ValidationError("frames[" + std::to_string(i) + "]." + e.field(), "invalid frame");
    }
  }
}

ModelInput prepare_input(const FeatureProvider& provider, const ModelConfig& config, const ObservationWindow& window) {
  window.validate(config.context_n);
  return {perceive(provider, config.perception, window.frames), window.positions, window.subgoal};
}

PolicyModel::PolicyModel(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  SplitMix rng(init_seed);
  const std::size_t d = config_.token_dim();
  const std::size_t hid = config_.mlp_hidden;
  Layout& l = layout_;
  l.depth = make_depth_encoder(store_, "depth", config_.perception.depth_dim, rng);
  for (std::size_t i = 0; i < config_.n_track_layers; ++i) {
    l.track.push_back(make_track_layer(store_, "track" + std::to_string(i), d, config_.heads, hid, rng));
  }
  l.frame_embed = store_.add("frame_embed", uniform_tensor({config_.context_n, d}, 0.1, rng));
  l.trajectory = make_mlp(store_, "trajectory", 2, hid, d, rng);
  l.target = make_mlp(store_, "target", 2, hid, d, rng);
  for (std::size_t i = 0; i < config_.n_global_layers; ++i) {
    l.global.push_back(make_block(store_, "global" + std::to_string(i), d, config_.heads, hid, rng));
  }
  for (std::size_t i = 0; i < config_.n_target_layers; ++i) {
    l.target_blocks.push_back(make_block(store_, "target_attn" + std::to_string(i), d, config_.heads, hid, rng));
  }
  l.final_ln = make_layer_norm(store_, "final_ln", d);
  l.trunk = make_mlp(store_, "trunk", d, hid, d, rng);
  l.arrival = make_linear(store_, "arrival_head", d, 1, rng);
  l.action = make_linear(store_, "action_head", d, 2 * config_.horizon, rng);
}

Var PolicyModel::image_tokens(Params p, const ModelInput& input) const {
  const WindowPerception& wp = input.perception;
  const PerceptionConfig& pc = config_.perception;
  const std::size_t n = config_.context_n;
  const std::size_t patches = pc.grid_h * pc.grid_w;
  if (wp.appearance.size() != n || wp.depth.size() != n) {
    throw ValidationError("frames", "perception covers " + std::to_string(wp.appearance.size()) + " frames, model needs " +
                                        std::to_string(n));
  }
  Tensor x(Shape{n * patches, pc.appearance_dim});
  DepthMap stacked{n * pc.grid_h, pc.grid_w, {}};
  stacked.z.reserve(n * patches);
  for (std::size_t i = 0; i < n; ++i) {
    const FeatureGrid& g = wp.appearance[i];
    if (g.grid_h != pc.grid_h || g.grid_w != pc.grid_w || g.dim != pc.appearance_dim) {
      throw DimensionError("appearance grid of frame " + std::to_string(i) + " does not match the model config");
    }
    if (wp.depth[i].grid_h != pc.grid_h || wp.depth[i].grid_w != pc.grid_w) {
      throw DimensionError("depth map of frame " + std::to_string(i) + " does not match the model config");
    }
    std::copy(g.values.begin(), g.values.end(), x.data() + i * patches * pc.appearance_dim);
    stacked.z.insert(stacked.z.end(), wp.depth[i].z.begin(), wp.depth[i].z.end());
  }
  Tape& tape = p[0].tape();
  Var h = assemble_tokens(tape.constant(std::move(x)), encode_depth(p, layout_.depth, stacked), config_.use_depth);
  if (config_.use_tracking) {
    if (wp.tracks.frames != n) throw ValidationError("tracks", "track set does not span the window");
    for (const TrackAttentionLayer& layer : layout_.track) h = track_attention(p, layer, h, wp.tracks);
  }
  return h;
}

Var PolicyModel::encode_trajectory(Params p, std::span<const Vec2> positions) const {
  if (positions.size() != config_.context_n) {
    throw DimensionError("encode_trajectory: expected " + std::to_string(config_.context_n) + " positions, got " +
                         std::to_string(positions.size()));
  }
  Tensor t(Shape{positions.size(), 2});
  for (std::size_t i = 0; i < positions.size(); ++i) {
    t.at(i, 0) = positions[i].x * config_.position_scale;
    t.at(i, 1) = positions[i].y * config_.position_scale;
  }
  return apply(p, layout_.trajectory, p[0].tape().constant(std::move(t)));
}

Var PolicyModel::encode_target(Params p, Vec2 subgoal) const {
  Tensor t = Tensor::matrix(1, 2, {subgoal.x * config_.position_scale, subgoal.y * config_.position_scale});
  return apply(p, layout_.target, p[0].tape().constant(std::move(t)));
}

Var PolicyModel::global_attention(Params p, Var image_tokens, Var trajectory_tokens) const {
  const std::size_t n = config_.context_n;
  const std::size_t rows = image_tokens.value().rows();
  if (rows % n != 0) throw DimensionError("image tokens do not split into " + std::to_string(n) + " frames");
  const std::size_t per_frame = rows / n;
  Var frames = image_tokens;
  std::size_t tokens_per_frame = per_frame;
  if (!config_.use_patch_tokens) {
    std::vector<Var> pooled;
    for (std::size_t i = 0; i < n; ++i) pooled.push_back(mean_rows(slice_rows(image_tokens, i * per_frame, per_frame)));
    frames = concat_rows(pooled);
    tokens_per_frame = 1;
  } else {
    const PerceptionConfig& pc = config_.perception;
    if (per_frame == pc.grid_h * pc.grid_w) {
      std::vector<Vec2> centers;
      const std::vector<Vec2> one = patch_centers(pc.grid_h, pc.grid_w);
      for (std::size_t i = 0; i < n; ++i) centers.insert(centers.end(), one.begin(), one.end());
      frames = rope2d(frames, centers);
    }
  }
  std::vector<std::size_t> frame_of_row;
  frame_of_row.reserve(n * tokens_per_frame + n);
  for (std::size_t i = 0; i < n; ++i) frame_of_row.insert(frame_of_row.end(), tokens_per_frame, i);
  for (std::size_t i = 0; i < n; ++i) frame_of_row.push_back(i);
  const Var parts[] = {frames, trajectory_tokens};
  Var seq = add(concat_rows(parts), gather_rows(p[layout_.frame_embed], std::move(frame_of_row)));
  for (const TransformerBlock& block : layout_.global) seq = apply(p, block, seq);
  return seq;
}

Var PolicyModel::target_attention(Params p, Var global_tokens, Var target_token) const {
  const Var parts[] = {global_tokens, target_token};
  Var seq = concat_rows(parts);
  const std::size_t last = layout_.target_blocks.size() - 1;
  for (std::size_t i = 0; i < last; ++i) seq = apply(p, layout_.target_blocks[i], seq);
  return apply_last_row(p, layout_.target_blocks[last], seq);
}

ForwardVars PolicyModel::heads(Params p, Var target_row) const {
  const Var trunk = apply(p, layout_.trunk, apply(p, layout_.final_ln, target_row));
  const Var arrival = sigmoid(apply(p, layout_.arrival, trunk));
  const Var deltas = reshape(apply(p, layout_.action, trunk), Shape{config_.horizon, 2});
  return {cumsum_rows(deltas), arrival};
}

ForwardVars PolicyModel::forward(Params p, const ModelInput& input) const {
  const Var tokens = image_tokens(p, input);
  const Var w = encode_trajectory(p, input.positions);
  const Var g = encode_target(p, input.subgoal);
  return heads(p, target_attention(p, global_attention(p, tokens, w), g));
}

PolicyOutput to_output(const ForwardVars& vars) {
  PolicyOutput out;
  const Tensor& wp = vars.waypoints.value();
  for (std::size_t i = 0; i < wp.rows(); ++i) out.waypoints.push_back({wp.at(i, 0), wp.at(i, 1)});
  out.arrival_prob = vars.arrival.value()[0];
  return out;
}

PolicyOutput PolicyModel::predict(const ModelInput& input) const {
  Tape tape;
  std::vector<Var> p;
  p.reserve(store_.size());
  for (std::size_t i = 0; i < store_.size(); ++i) p.push_back(tape.constant(store_.tensor(i)));
  PolicyOutput out = to_output(forward(p, input));
  for (const Vec2& w : out.waypoints) {
    if (!std::isfinite(w.x) || !std::isfinite(w.y)) throw NumericError("model produced a non-finite waypoint");
  }
  return out;
}

PolicyOutput PolicyModel::predict(const FeatureProvider& provider, const ObservationWindow& window) const {
  return predict(prepare_input(provider, config_, window));
}

}  // namespace sw
