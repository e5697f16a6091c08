#include "tracking/track_attention.hpp"

#include "common/error.hpp"

namespace sw {

TrackAttentionLayer make_track_layer(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads,
                                     std::size_t hidden, SplitMix& rng) {
  TrackAttentionLayer l;
  l.track_base = store.add(name + ".track_base", uniform_tensor({1, d}, 1.0, rng));
  l.w_t = make_linear(store, name + ".w_t", d, d, rng);
  l.sample = make_attention(store, name + ".sample", d, heads, rng);
  l.temporal = make_block(store, name + ".temporal", d, heads, hidden, rng);
  l.coord_base = store.add(name + ".coord_base", uniform_tensor({1, d}, 1.0, rng));
  l.update = make_attention(store, name + ".update", d, heads, rng, Init::kZero);
  return l;
}

namespace {

std::vector<Vec2> tiled_patch_centers(std::size_t frames, std::size_t grid_h, std::size_t grid_w) {
  const std::vector<Vec2> one = patch_centers(grid_h, grid_w);
  std::vector<Vec2> out;
  out.reserve(frames * one.size());
  for (std::size_t i = 0; i < frames; ++i) out.insert(out.end(), one.begin(), one.end());
  return out;
}

std::size_t frames_of(Var image_tokens, std::size_t grid_h, std::size_t grid_w) {
  const std::size_t patches = grid_h * grid_w;
  const std::size_t rows = image_tokens.value().rows();
  if (patches == 0 || rows % patches != 0) {
    throw DimensionError("image token rows " + std::to_string(rows) + " are not a multiple of the " +
                         std::to_string(grid_h) + "x" + std::to_string(grid_w) + " grid");
  }
  return rows / patches;
}

}  // namespace

TrackRows embed_tracks(Params p, const TrackAttentionLayer& layer, const TrackSet& tracks) {
  tracks.validate();
  TrackRows out{std::nullopt, tracks.frames, tracks.size()};
  if (tracks.size() == 0 || tracks.frames == 0) return out;
  std::vector<Vec2> positions;
  positions.reserve(tracks.frames * tracks.size());
  for (std::size_t i = 0; i < tracks.frames; ++i)
    for (const auto& track : tracks.tracks) positions.push_back(track[i].position);
  const Var base = repeat_row(p[layer.track_base], positions.size());
  out.rows = apply(p, layer.w_t, rope2d(base, positions));
  return out;
}

TrackRows track_sample(Params p, const TrackAttentionLayer& layer, const TrackRows& track_tokens, Var image_tokens,
                       std::size_t grid_h, std::size_t grid_w) {
  if (track_tokens.empty()) return track_tokens;
  const std::size_t frames = frames_of(image_tokens, grid_h, grid_w);
  if (frames != track_tokens.frames) {
    throw DimensionError("track tokens cover " + std::to_string(track_tokens.frames) + " frames, image tokens " +
                         std::to_string(frames));
  }
  const std::vector<Vec2> centers = tiled_patch_centers(frames, grid_h, grid_w);
  const Var keys = rope2d(image_tokens, centers);
  AttentionLayout layout;
  layout.q_group = track_tokens.tracks;
  layout.k_group = grid_h * grid_w;
  TrackRows out = track_tokens;
  out.rows = multi_head_attention(p, layer.sample, *track_tokens.rows, keys, image_tokens, layout);
  return out;
}

TrackRows temporal_propagate(Params p, const TrackAttentionLayer& layer, const TrackRows& sampled,
                             const TrackSet& tracks) {
  if (sampled.empty()) return sampled;
  tracks.validate();
  const std::size_t n = sampled.frames, m = sampled.tracks;
  if (tracks.frames != n || tracks.size() != m) {
    throw ValidationError("tracks", "track set shape does not match the sampled features");
  }
  // Frame-major -> track-major and back.
  std::vector<std::size_t> to_track(n * m), to_frame(n * m);
  AttentionLayout layout;
  layout.q_group = n;
  layout.k_group = n;
  layout.key_bias.resize(n * m);
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      to_track[t * n + i] = i * m + t;
      to_frame[i * m + t] = t * n + i;
      layout.key_bias[t * n + i] = tracks.tracks[t][i].visible ? 0.0 : kInvisibleBias;
    }
  }
  const Var track_major = gather_rows(*sampled.rows, std::move(to_track));
  const Var propagated = apply(p, layer.temporal, track_major, layout);
  TrackRows out = sampled;
  out.rows = gather_rows(propagated, std::move(to_frame));
  return out;
}

Var feature_update(Params p, const TrackAttentionLayer& layer, Var image_tokens, const TrackRows& propagated,
                   std::size_t grid_h, std::size_t grid_w) {
  if (propagated.empty()) return image_tokens;
  const std::size_t frames = frames_of(image_tokens, grid_h, grid_w);
  if (frames != propagated.frames) throw DimensionError("track features and image tokens disagree on frame count");
  const std::vector<Vec2> centers = tiled_patch_centers(frames, grid_h, grid_w);
  const Var coords = rope2d(repeat_row(p[layer.coord_base], centers.size()), centers);
  AttentionLayout layout;
  layout.q_group = grid_h * grid_w;
  layout.k_group = propagated.tracks;
  const Var delta = multi_head_attention(p, layer.update, coords, *propagated.rows, *propagated.rows, layout);
  return add(image_tokens, delta);
}

Var track_attention(Params p, const TrackAttentionLayer& layer, Var image_tokens, const TrackSet& tracks) {
  const TrackRows q = embed_tracks(p, layer, tracks);
  const TrackRows s = track_sample(p, layer, q, image_tokens, tracks.grid_h, tracks.grid_w);
  const TrackRows st = temporal_propagate(p, layer, s, tracks);
  return feature_update(p, layer, image_tokens, st, tracks.grid_h, tracks.grid_w);
}

}  // namespace sw
