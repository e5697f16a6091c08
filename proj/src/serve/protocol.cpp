#include "serve/protocol.hpp"

#include <cmath>
#include <json.hpp>

#include "common/base64.hpp"
#include "common/error.hpp"
#include "episodes/episode.hpp"

namespace sw {

namespace {

using json = nlohmann::ordered_json;

const json& field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(path, "must be finite");
  return x;
}

std::uint64_t unsigned_integer(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) throw ValidationError(path, "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

Vec2 point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ValidationError(path, "must be an [x, y] pair");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

ProviderInput view(const json& v, const std::string& path, std::size_t index) {
  if (!v.is_object()) throw ValidationError(path, "must be an object");
  ProviderInput in;
  in.seed = unsigned_integer(field(v, "seed", path + ".seed"), path + ".seed");
  if (auto it = v.find("pose"); it != v.end()) {
    if (!it->is_array() || it->size() != 3) throw ValidationError(path + ".pose", "must be [x, y, heading]");
    in.pose = {{number((*it)[0], path + ".pose[0]"), number((*it)[1], path + ".pose[1]")},
               number((*it)[2], path + ".pose[2]")};
  }
  in.time_s = v.contains("time_s") ? number(v["time_s"], path + ".time_s") : static_cast<double>(index);
  return in;
}

json view_json(const ProviderInput& in) {
  json v;
  v["seed"] = in.seed;
  v["pose"] = json::array({in.pose.position.x, in.pose.position.y, in.pose.heading});
  v["time_s"] = in.time_s;
  return v;
}

FeatureFile tensor_payload(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path, "must be a base64 SWFT string");
  try {
    return decode_feature_file(base64_decode(v.get<std::string>()));
  } catch (const FormatError& e) {
    throw ValidationError(path, e.what());
  }
}

}  // namespace

PredictRequest parse_predict_request(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ValidationError("$", "body must be a JSON object");
  PredictRequest req;
  const json& version = field(doc, "protocol_version", "protocol_version");
  if (!version.is_number_integer() || version.get<int>() != kProtocolVersion) {
    throw ValidationError("protocol_version", "unsupported, expected " + std::to_string(kProtocolVersion));
  }
  if (auto it = doc.find("mode"); it != doc.end()) {
    if (!it->is_string()) throw ValidationError("mode", "must be \"monocular\" or \"stereo\"");
    try {
      req.mode = parse_depth_mode(it->get<std::string>());
    } catch (const Error&) {
      throw ValidationError("mode", "must be \"monocular\" or \"stereo\"");
    }
  }
  const json& positions = field(doc, "positions", "positions");
  if (!positions.is_array()) throw ValidationError("positions", "must be an array of [x, y] pairs");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    req.window.positions.push_back(point(positions[i], "positions[" + std::to_string(i) + "]"));
  }
  req.window.subgoal = point(field(doc, "subgoal", "subgoal"), "subgoal");
  const json& frames = field(doc, "frames", "frames");
  if (!frames.is_array()) throw ValidationError("frames", "must be an array");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string path = "frames[" + std::to_string(i) + "]";
    const json& f = frames[i];
    FrameObservation obs;
    obs.left = view(f, path, i);
    if (auto it = f.find("frame_id"); it != f.end()) {
      if (!it->is_number_integer()) throw ValidationError(path + ".frame_id", "must be an integer");
      obs.frame_id = it->get<std::int64_t>();
    } else {
      obs.frame_id = static_cast<std::int64_t>(i);
    }
    if (auto it = f.find("right"); it != f.end()) obs.right = view(*it, path + ".right", i);
    const StereoRig rig;
    obs.focal_px = f.contains("focal_px") ? number(f["focal_px"], path + ".focal_px") : rig.focal_px;
    obs.baseline_m = f.contains("baseline_m") ? number(f["baseline_m"], path + ".baseline_m") : rig.baseline_m;
    if (!(obs.focal_px > 0.0)) throw ValidationError(path + ".focal_px", "must be positive");
    if (obs.right && !(obs.baseline_m > 0.0)) throw ValidationError(path + ".baseline_m", "must be positive");
    if (req.mode == DepthMode::kStereo && !obs.right) {
      throw ValidationError(path + ".right", "required in stereo mode");
    }
    req.window.frames.push_back(obs);
  }
  if (auto it = doc.find("world"); it != doc.end()) {
    try {
      req.world = world_from_json(it->dump());
    } catch (const Error& e) {
      throw ValidationError("world", e.what());
    }
  }
  if (auto it = doc.find("features"); it != doc.end()) {
    if (!it->is_object()) throw ValidationError("features", "must be an object");
    req.appearance = tensor_payload(field(*it, "appearance", "features.appearance"), "features.appearance");
    if (auto d = it->find("depth"); d != it->end()) {
      req.depth = tensor_payload(*d, "features.depth");
      if (req.depth->dim != 1) throw ValidationError("features.depth", "depth tensors must have dim 1");
    }
    for (std::size_t i = 0; i < req.window.frames.size(); ++i) {
      const std::int64_t id = req.window.frames[i].frame_id;
      if (id < 0 || static_cast<std::size_t>(id) >= req.appearance->frames.size()) {
        throw ValidationError("frames[" + std::to_string(i) + "].frame_id", "not covered by features.appearance");
      }
      if (req.depth && static_cast<std::size_t>(id) >= req.depth->frames.size()) {
        throw ValidationError("frames[" + std::to_string(i) + "].frame_id", "not covered by features.depth");
      }
    }
  }
  return req;
}

std::string predict_request_to_json(const PredictRequest& request) {
  json doc;
  doc["protocol_version"] = request.protocol_version;
  doc["mode"] = depth_mode_name(request.mode);
  doc["positions"] = json::array();
  for (Vec2 p : request.window.positions) doc["positions"].push_back(point_json(p));
  doc["subgoal"] = point_json(request.window.subgoal);
  doc["frames"] = json::array();
  for (const FrameObservation& f : request.window.frames) {
    json v = view_json(f.left);
    v["frame_id"] = f.frame_id;
    if (f.right) v["right"] = view_json(*f.right);
    v["focal_px"] = f.focal_px;
    v["baseline_m"] = f.baseline_m;
    doc["frames"].push_back(std::move(v));
  }
  if (request.world) doc["world"] = json::parse(world_to_json(*request.world));
  if (request.appearance) {
    doc["features"]["appearance"] = base64_encode(encode_feature_file(*request.appearance));
    if (request.depth) doc["features"]["depth"] = base64_encode(encode_feature_file(*request.depth));
  }
  return doc.dump();
}

std::shared_ptr<const FeatureProvider> request_provider(const PredictRequest& request) {
  std::shared_ptr<const FeatureProvider> base;
  if (request.world) {
    base = std::make_shared<SceneProvider>(std::make_shared<World>(*request.world));
  } else {
    base = std::make_shared<ProceduralProvider>();
  }
  if (!request.appearance) return base;
  return std::make_shared<FileProvider>(*request.appearance, request.depth, base);
}

std::string predict_response_to_json(const PredictResponse& response) {
  json doc;
  doc["protocol_version"] = kProtocolVersion;
  doc["waypoints"] = json::array();
  for (Vec2 w : response.output.waypoints) doc["waypoints"].push_back(point_json(w));
  doc["arrival_prob"] = response.output.arrival_prob;
  doc["model_id"] = response.model_id;
  doc["latency_ms"] = response.latency_ms;
  return doc.dump();
}

PredictResponse parse_predict_response(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("waypoints") || !doc.contains("arrival_prob")) {
    throw FormatError("not a predict response", 0);
  }
  PredictResponse r;
  try {
    for (const json& w : doc["waypoints"]) r.output.waypoints.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
    r.output.arrival_prob = doc["arrival_prob"].get<double>();
    r.model_id = doc.value("model_id", "");
    r.latency_ms = doc.value("latency_ms", 0.0);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed predict response: ") + e.what(), 0);
  }
  return r;
}

}  // namespace sw
