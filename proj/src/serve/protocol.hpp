#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "nav/world.hpp"
#include "perception/providers.hpp"
#include "policy/model.hpp"

namespace sw {

inline constexpr int kProtocolVersion = 1;

// One /predict request. Frames are always described by provider inputs; the
// optional inline tensors replace the provider's appearance (and depth) for
// the frame ids they cover, and the optional world switches the fallback
// provider from procedural features to the ray-cast scene.
struct PredictRequest {
  int protocol_version = kProtocolVersion;
  DepthMode mode = DepthMode::kMonocular;
  ObservationWindow window;
  std::optional<World> world;
  std::optional<FeatureFile> appearance;
  std::optional<FeatureFile> depth;
};

// Schema checks only; shape checks against a model happen in the service.
// Throws ValidationError naming the offending field path.
PredictRequest parse_predict_request(const std::string& body);
std::string predict_request_to_json(const PredictRequest& request);

// Provider implied by the request (file, scene or procedural).
std::shared_ptr<const FeatureProvider> request_provider(const PredictRequest& request);

struct PredictResponse {
  PolicyOutput output;
  std::string model_id;
  double latency_ms = 0.0;
};

std::string predict_response_to_json(const PredictResponse& response);
// Throws FormatError when the body is not a response document.
PredictResponse parse_predict_response(const std::string& body);

}  // namespace sw
