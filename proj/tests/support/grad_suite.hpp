#pragma once

// Finite-difference cases covering every differentiable op, layer, tracking
// stage, model stage and the end-to-end loss of the minimal model.

#include <memory>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "perception/perception.hpp"
#include "policy/loss.hpp"
#include "support/fixtures.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/layers.hpp"
#include "tensor/ops.hpp"
#include "tracking/track_attention.hpp"

namespace sw::grad_suite {

struct Case {
  std::string name;
  DifferentiableOp op;
  std::vector<Tensor> inputs;
};

inline Tensor random_matrix(std::size_t r, std::size_t c, SplitMix& rng, double scale = 1.0) {
  Tensor t(Shape{r, c});
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

inline Tensor random_vector(std::size_t n, SplitMix& rng, double scale = 1.0) {
  Tensor t(Shape{n});
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

inline std::vector<Tensor> store_tensors(const ParamStore& store) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < store.size(); ++i) out.push_back(store.tensor(i));
  return out;
}

inline TrackSet visible_tracks(std::size_t frames, std::size_t count, std::size_t h, std::size_t w, SplitMix& rng) {
  TrackSet set{frames, h, w, {}};
  for (std::size_t m = 0; m < count; ++m) {
    std::vector<TrackPoint> track;
    for (std::size_t i = 0; i < frames; ++i) {
      track.push_back({{rng.uniform(0.0, static_cast<double>(w - 1)), rng.uniform(0.0, static_cast<double>(h - 1))}, true});
    }
    set.tracks.push_back(std::move(track));
  }
  return set;
}

// Holds parameter stores and models alive for the lifetime of the ops.
struct Suite {
  std::vector<Case> cases;
  std::vector<std::shared_ptr<void>> keep_alive;
};

inline Suite build(std::uint64_t seed) {
  Suite s;
  SplitMix rng(seed * 7919 + 17);
  auto& c = s.cases;
  const auto push = [&](std::string name, DifferentiableOp op, std::vector<Tensor> in) {
    c.push_back({std::move(name), std::move(op), std::move(in)});
  };

  push("matmul", [](Tape&, std::span<const Var> in) { return matmul(in[0], in[1]); },
      {random_matrix(3, 4, rng), random_matrix(4, 2, rng)});
  push("linear", [](Tape&, std::span<const Var> in) { return linear(in[0], in[1], in[2]); },
      {random_matrix(3, 4, rng), random_matrix(4, 2, rng), random_vector(2, rng)});
  push("add_sub_mul", [](Tape&, std::span<const Var> in) { return mul(add(in[0], in[1]), sub(in[0], in[1])); },
      {random_matrix(2, 3, rng), random_matrix(2, 3, rng)});
  push("add_row_scale", [](Tape&, std::span<const Var> in) { return scale(add_row(in[0], in[1]), -1.7); },
      {random_matrix(3, 4, rng), random_matrix(1, 4, rng)});
  push("concat_slice_gather",
      [](Tape&, std::span<const Var> in) {
        const Var cc = concat_cols(in[0], in[1]);
        const Var parts[] = {cc, mean_rows(cc)};
        const Var rows = concat_rows(parts);
        return mul(gather_rows(slice_cols(rows, 1, 4), {3, 0, 0, 2}), repeat_row(slice_rows(in[2], 1, 1), 4));
      },
      {random_matrix(3, 2, rng), random_matrix(3, 3, rng), random_matrix(2, 4, rng)});
  push("reshape_cumsum", [](Tape&, std::span<const Var> in) { return cumsum_rows(reshape(in[0], {3, 2})); },
      {random_matrix(2, 3, rng)});
  push("gelu", [](Tape&, std::span<const Var> in) { return gelu(in[0]); }, {random_matrix(2, 5, rng)});
  push("sigmoid", [](Tape&, std::span<const Var> in) { return sigmoid(in[0]); }, {random_matrix(2, 5, rng)});
  push("softmax", [](Tape&, std::span<const Var> in) { return softmax(in[0]); }, {random_matrix(3, 5, rng, 2.0)});
  push("layer_norm", [](Tape&, std::span<const Var> in) { return layer_norm(in[0], in[1], in[2]); },
      {random_matrix(3, 6, rng), random_vector(6, rng), random_vector(6, rng)});
  push("sum", [](Tape&, std::span<const Var> in) { return sum(in[0]); }, {random_matrix(2, 3, rng)});
  {
    const Tensor w = random_matrix(2, 3, rng);
    push("weighted_sum", [w](Tape&, std::span<const Var> in) { return weighted_sum(in[0], w); },
        {random_matrix(2, 3, rng)});
  }
  {
    const std::vector<Vec2> pos{{1, 2}, {-3, 0.5}, {0, 7}};
    push("rope2d", [pos](Tape&, std::span<const Var> in) { return rope2d(in[0], pos); }, {random_matrix(3, 8, rng)});
  }
  {
    AttentionLayout layout;
    layout.heads = 2;
    layout.q_group = 2;
    layout.k_group = 3;
    push("attention_grouped", [layout](Tape&, std::span<const Var> in) { return attention(in[0], in[1], in[2], layout); },
        {random_matrix(4, 4, rng), random_matrix(6, 4, rng), random_matrix(6, 4, rng)});
  }

  // Layers: store tensors first, then the data input.
  {
    auto store = std::make_shared<ParamStore>();
    const auto attn = make_attention(*store, "a", 8, 2, rng);
    const auto mlp = make_mlp(*store, "m", 8, 12, 8, rng);
    const auto block = make_block(*store, "b", 8, 2, 12, rng);
    const std::size_t n = store->size();
    std::vector<Tensor> in = store_tensors(*store);
    in.push_back(random_matrix(3, 8, rng));
    push("multi_head_attention",
        [attn, n](Tape&, std::span<const Var> x) { return multi_head_attention(x.first(n), attn, x[n], x[n], x[n]); }, in);
    push("mlp", [mlp, n](Tape&, std::span<const Var> x) { return apply(x.first(n), mlp, x[n]); }, in);
    push("transformer_block", [block, n](Tape&, std::span<const Var> x) { return apply(x.first(n), block, x[n]); }, in);
    s.keep_alive.push_back(store);
  }

  // Depth encoder.
  {
    auto store = std::make_shared<ParamStore>();
    const DepthEncoder enc = make_depth_encoder(*store, "depth", 4, rng);
    const DepthMap depth{2, 2, {rng.uniform(0.5, 2), rng.uniform(2, 8), rng.uniform(8, 20), rng.uniform(20, 40)}};
    push("encode_depth", [enc, depth](Tape&, std::span<const Var> in) { return encode_depth(in, enc, depth); },
        store_tensors(*store));
    push("assemble_tokens",
        [](Tape&, std::span<const Var> in) { return assemble_tokens(in[0], in[1], true); },
        {random_matrix(4, 6, rng), random_matrix(4, 2, rng)});
    s.keep_alive.push_back(store);
  }

  // Tracking-guided attention, output projection randomised so every stage
  // carries gradient.
  {
    auto store = std::make_shared<ParamStore>();
    const TrackAttentionLayer layer = make_track_layer(*store, "trk", 8, 2, 12, rng);
    store->tensor(layer.update.o.weight) = uniform_tensor({8, 8}, 0.5, rng);
    const TrackSet set = visible_tracks(2, 2, 1, 2, rng);
    const std::size_t n = store->size();
    std::vector<Tensor> in = store_tensors(*store);
    in.push_back(random_matrix(4, 8, rng));
    push("embed_tracks", [layer, set](Tape&, std::span<const Var> x) { return *embed_tracks(x, layer, set).rows; },
        store_tensors(*store));
    push("track_sample",
        [layer, set, n](Tape&, std::span<const Var> x) {
          const auto p = x.first(n);
          return *track_sample(p, layer, embed_tracks(p, layer, set), x[n], 1, 2).rows;
        },
        in);
    push("temporal_propagate",
        [layer, set, n](Tape&, std::span<const Var> x) {
          const auto p = x.first(n);
          return *temporal_propagate(p, layer, {x[n], 2, 2}, set).rows;
        },
        in);
    push("track_attention",
        [layer, set, n](Tape&, std::span<const Var> x) { return track_attention(x.first(n), layer, x[n], set); }, in);
    s.keep_alive.push_back(store);
  }

  // Model stages and the composite loss on the minimal configuration.
  {
    const ModelConfig cfg = ModelConfig::tiny();
    auto model = std::make_shared<PolicyModel>(cfg, seed);
    fixture::randomize_params(*model, seed + 100);
    auto sample = std::make_shared<TrainingSample>(fixture::random_sample(cfg, seed + 200));
    const std::vector<Tensor> params = store_tensors(model->params());
    const PolicyModel* m = model.get();
    const TrainingSample* smp = sample.get();
    push("encode_trajectory", [m, smp](Tape&, std::span<const Var> p) { return m->encode_trajectory(p, smp->input.positions); },
        params);
    push("encode_target", [m, smp](Tape&, std::span<const Var> p) { return m->encode_target(p, smp->input.subgoal); },
        params);
    push("global_and_target_attention",
        [m, smp](Tape&, std::span<const Var> p) {
          const Var h = m->global_attention(p, m->image_tokens(p, smp->input), m->encode_trajectory(p, smp->input.positions));
          return m->target_attention(p, h, m->encode_target(p, smp->input.subgoal));
        },
        params);
    push("direction_loss",
        [smp](Tape&, std::span<const Var> in) { return direction_loss(in[0], smp->gt_waypoints); },
        {random_matrix(cfg.horizon, 2, rng)});
    push("binary_cross_entropy", [](Tape&, std::span<const Var> in) { return binary_cross_entropy(sigmoid(in[0]), true); },
        {random_matrix(1, 1, rng)});
    push("composite_loss_end_to_end",
        [m, smp, cfg](Tape&, std::span<const Var> p) {
          const ForwardVars f = m->forward(p, smp->input);
          return composite_loss(f.waypoints, f.arrival, smp->gt_waypoints, smp->gt_arrived, cfg).total;
        },
        params);
    s.keep_alive.push_back(model);
    s.keep_alive.push_back(sample);
  }
  return s;
}

}  // namespace sw::grad_suite
