#pragma once

#include <optional>
#include <string>

#include "perception/types.hpp"
#include "tensor/layers.hpp"

namespace sw {

// One tracking-guided attention layer: track-aware sampling, temporal
// propagation along each track, and a residual feature update.
struct TrackAttentionLayer {
  std::size_t track_base = 0;  // e, [1 x d]
  LinearLayer w_t;
  AttentionParams sample;
  TransformerBlock temporal;
  std::size_t coord_base = 0;  // base of the patch coordinate embedding, [1 x d]
  AttentionParams update;      // output projection starts at zero
};

TrackAttentionLayer make_track_layer(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads,
                                     std::size_t hidden, SplitMix& rng);

// Per-frame track rows, frame-major: row i*tracks + m is track m at frame i.
// `rows` is empty when the track set is empty.
struct TrackRows {
  std::optional<Var> rows;
  std::size_t frames = 0;
  std::size_t tracks = 0;

  bool empty() const { return !rows.has_value(); }
};

// q_{i,m} = W_T rope2d(e, p_{i,m})
TrackRows embed_tracks(Params p, const TrackAttentionLayer& layer, const TrackSet& tracks);

// Cross-attention from track tokens to the same frame's image tokens
// ([frames*grid_h*grid_w x d], frame-major). Keys carry RoPE at patch centers.
TrackRows track_sample(Params p, const TrackAttentionLayer& layer, const TrackRows& track_tokens, Var image_tokens,
                       std::size_t grid_h, std::size_t grid_w);

// Pre-norm transformer block over each track's sequence of frames; tracks do
// not see each other. Invisible points get a large negative key bias.
TrackRows temporal_propagate(Params p, const TrackAttentionLayer& layer, const TrackRows& sampled,
                             const TrackSet& tracks);

// H + W'_O attn(c, S~, S~) with c the RoPE'd coordinate base at each patch.
Var feature_update(Params p, const TrackAttentionLayer& layer, Var image_tokens, const TrackRows& propagated,
                   std::size_t grid_h, std::size_t grid_w);

// All three stages. Returns `image_tokens` unchanged when there are no tracks.
Var track_attention(Params p, const TrackAttentionLayer& layer, Var image_tokens, const TrackSet& tracks);

inline constexpr double kInvisibleBias = -1e4;

}  // namespace sw
