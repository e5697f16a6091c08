#pragma once

#include <cstdint>
#include <string>

#include "perception/perception.hpp"

namespace sw {

struct ModelConfig {
  PerceptionConfig perception;
  std::size_t context_n = 5;
  std::size_t horizon = 5;
  std::size_t n_track_layers = 2;
  std::size_t n_global_layers = 2;
  std::size_t n_target_layers = 1;
  std::size_t heads = 4;
  std::size_t mlp_hidden = 80;
  bool use_patch_tokens = true;
  bool use_depth = true;
  bool use_tracking = true;
  double lambda_arrvd = 1.0;
  double lambda_dir = 10.0;
  // Positions and sub-goals are multiplied by this before their MLPs.
  double position_scale = 0.2;
  double arrival_radius_m = 1.0;

  std::size_t token_dim() const { return perception.token_dim(); }
  // Length of the global-attention sequence.
  std::size_t global_sequence_length() const;
  // Throws ConfigError naming the first inconsistent field.
  void validate() const;

  // 2x2 grid, 6+2 dims, N=2, horizon 2, 2 tracks: for gradient checks.
  static ModelConfig tiny();
  // 4x4 grid, 12+4 dims, 16 tracks: for single-core training runs.
  static ModelConfig toy();
  // 8x8 grid, 32+8 dims, 64 tracks.
  static ModelConfig desk();
  // 25x25 grid, 768+64 dims, 2/12/4 layers. Shape checks only.
  static ModelConfig full();
  static ModelConfig preset(const std::string& name);
};

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);
// Stable 64-bit hash of the canonical JSON form.
std::uint64_t config_hash(const ModelConfig& config);

}  // namespace sw
