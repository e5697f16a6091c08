#include "policy/config.hpp"

#include <json.hpp>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace sw {

std::size_t ModelConfig::global_sequence_length() const {
  const std::size_t per_frame = use_patch_tokens ? perception.grid_h * perception.grid_w : 1;
  return context_n * per_frame + context_n;
}

void ModelConfig::validate() const {
  perception.validate();
  const std::size_t d = token_dim();
  if (context_n == 0) throw ConfigError("context_n must be positive");
  if (horizon == 0) throw ConfigError("horizon must be positive");
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("token_dim " + std::to_string(d) + " is not divisible by heads " + std::to_string(heads));
  }
  if (d % 4 != 0) throw ConfigError("token_dim must be a multiple of 4 for 2-D rotary embedding");
  if (n_target_layers == 0) throw ConfigError("n_target_layers must be at least 1");
  if (mlp_hidden == 0) throw ConfigError("mlp_hidden must be positive");
  if (!(lambda_arrvd >= 0.0)) throw ConfigError("lambda_arrvd must be >= 0");
  if (!(lambda_dir >= 0.0)) throw ConfigError("lambda_dir must be >= 0");
  if (!(position_scale > 0.0)) throw ConfigError("position_scale must be positive");
  if (!(arrival_radius_m > 0.0)) throw ConfigError("arrival_radius_m must be positive");
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.perception.grid_h = 2;
  c.perception.grid_w = 2;
  c.perception.appearance_dim = 6;
  c.perception.depth_dim = 2;
  c.perception.num_tracks = 2;
  c.context_n = 2;
  c.horizon = 2;
  c.n_global_layers = 1;
  c.heads = 2;
  c.mlp_hidden = 12;
  return c;
}

ModelConfig ModelConfig::toy() {
  ModelConfig c;
  c.perception.grid_h = 4;
  c.perception.grid_w = 4;
  c.perception.appearance_dim = 12;
  c.perception.depth_dim = 4;
  c.perception.num_tracks = 16;
  c.heads = 2;
  c.mlp_hidden = 32;
  return c;
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.perception = PerceptionConfig::full();
  c.n_global_layers = 12;
  c.n_target_layers = 4;
  c.heads = 8;
  c.mlp_hidden = 4 * c.perception.token_dim();
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "tiny") return tiny();
  if (name == "toy") return toy();
  if (name == "desk") return desk();
  if (name == "full") return full();
  throw ConfigError("unknown model preset \"" + name + "\" (tiny, toy, desk, full)");
}

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const ModelConfig& c) {
  const PerceptionConfig& p = c.perception;
  return ordered_json{
      {"grid_h", p.grid_h},
      {"grid_w", p.grid_w},
      {"appearance_dim", p.appearance_dim},
      {"depth_dim", p.depth_dim},
      {"patch_px", p.patch_px},
      {"num_tracks", p.num_tracks},
      {"min_disparity_px", p.min_disparity_px},
      {"depth_mode", depth_mode_name(p.mode)},
      {"context_n", c.context_n},
      {"horizon", c.horizon},
      {"n_track_layers", c.n_track_layers},
      {"n_global_layers", c.n_global_layers},
      {"n_target_layers", c.n_target_layers},
      {"heads", c.heads},
      {"mlp_hidden", c.mlp_hidden},
      {"use_patch_tokens", c.use_patch_tokens},
      {"use_depth", c.use_depth},
      {"use_tracking", c.use_tracking},
      {"lambda_arrvd", c.lambda_arrvd},
      {"lambda_dir", c.lambda_dir},
      {"position_scale", c.position_scale},
      {"arrival_radius_m", c.arrival_radius_m},
  };
}

}  // namespace

std::string config_to_json(const ModelConfig& config) { return to_json(config).dump(); }

ModelConfig config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
  }
  ModelConfig c;
  const auto get = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(out);
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(key, "wrong type in model config");
    }
  };
  PerceptionConfig& p = c.perception;
  get("grid_h", p.grid_h);
  get("grid_w", p.grid_w);
  get("appearance_dim", p.appearance_dim);
  get("depth_dim", p.depth_dim);
  get("patch_px", p.patch_px);
  get("num_tracks", p.num_tracks);
  get("min_disparity_px", p.min_disparity_px);
  std::string mode = depth_mode_name(p.mode);
  get("depth_mode", mode);
  p.mode = parse_depth_mode(mode);
  get("context_n", c.context_n);
  get("horizon", c.horizon);
  get("n_track_layers", c.n_track_layers);
  get("n_global_layers", c.n_global_layers);
  get("n_target_layers", c.n_target_layers);
  get("heads", c.heads);
  get("mlp_hidden", c.mlp_hidden);
  get("use_patch_tokens", c.use_patch_tokens);
  get("use_depth", c.use_depth);
  get("use_tracking", c.use_tracking);
  get("lambda_arrvd", c.lambda_arrvd);
  get("lambda_dir", c.lambda_dir);
  get("position_scale", c.position_scale);
  get("arrival_radius_m", c.arrival_radius_m);
  c.validate();
  return c;
}

std::uint64_t config_hash(const ModelConfig& config) {
  const std::string s = config_to_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) h = mix64(h ^ ch);
  return h;
}

}  // namespace sw
