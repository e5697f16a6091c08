#include "serve/service.hpp"

#include <cstdio>
#include <json.hpp>
#include <mutex>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "policy/checkpoint.hpp"
#include "serve/protocol.hpp"

namespace sw {

namespace {

using json = nlohmann::ordered_json;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kFormat:
    case ErrorCode::kDimension:
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDegenerateDisparity:
      return 400;
    case ErrorCode::kNotReady:
      return 503;
    default:
      return 500;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

HttpReply error_reply(int status, const std::string& code, const std::string& field, const std::string& message) {
  json doc;
  doc["error"]["code"] = code;
  doc["error"]["field"] = field;
  doc["error"]["message"] = message;
  return {status, doc.dump()};
}

PredictService::PredictService() : started_(std::chrono::steady_clock::now()) {}

void PredictService::load_checkpoint_bytes(std::span<const std::uint8_t> bytes) {
  auto model = std::make_unique<const PolicyModel>(decode_checkpoint(bytes));
  std::string id = checkpoint_id(bytes);
  const std::uint64_t hash = config_hash(model->config());
  std::unique_lock lock(mutex_);
  model_ = std::move(model);
  checkpoint_id_ = std::move(id);
  config_hash_ = hash;
}

void PredictService::load_checkpoint_file(const std::string& path) { load_checkpoint_bytes(read_file_bytes(path)); }

bool PredictService::ready() const {
  std::shared_lock lock(mutex_);
  return model_ != nullptr;
}

HttpReply PredictService::handle_predict(const std::string& body) const {
  const auto t0 = std::chrono::steady_clock::now();
  std::shared_lock lock(mutex_);
  if (!model_) return error_reply(503, "not_ready", "", "no checkpoint loaded");
  PredictResponse response;
  try {
    const PredictRequest req = parse_predict_request(body);
    const ModelConfig& config = model_->config();
    req.window.validate(config.context_n);
    PerceptionConfig pc = config.perception;
    pc.mode = req.mode;
    ModelInput input;
    try {
      input = {perceive(*request_provider(req), pc, req.window.frames), req.window.positions, req.window.subgoal};
    } catch (const DimensionError& e) {
      throw ValidationError("features", e.what());
    }
    response.output = model_->predict(input);
  } catch (const ValidationError& e) {
    return error_reply(400, "validation", e.field(), e.what());
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), error_code_name(e.code()), "", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", "", e.what());
  }
  response.model_id = checkpoint_id_;
  response.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return {200, predict_response_to_json(response)};
}

HttpReply PredictService::handle_health() const {
  std::shared_lock lock(mutex_);
  json doc;
  doc["status"] = model_ ? "ok" : "not ready";
  doc["uptime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  doc["checkpoint_id"] = model_ ? json(checkpoint_id_) : json(nullptr);
  doc["config_hash"] = model_ ? json(hex64(config_hash_)) : json(nullptr);
  if (model_) doc["horizon"] = model_->config().horizon;
  return {model_ ? 200 : 503, doc.dump()};
}

}  // namespace sw
