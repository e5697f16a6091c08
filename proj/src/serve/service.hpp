#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>

#include "policy/model.hpp"

namespace sw {

struct HttpReply {
  int status = 200;
  std::string body;
};

// Stateless predict endpoint over one read-only model. Requests take a shared
// lock; swapping the checkpoint takes the exclusive lock.
class PredictService {
 public:
  PredictService();

  // Atomic swap: a checkpoint that fails to decode leaves the old one serving.
  void load_checkpoint_bytes(std::span<const std::uint8_t> bytes);
  void load_checkpoint_file(const std::string& path);

  bool ready() const;
  HttpReply handle_predict(const std::string& body) const;
  HttpReply handle_health() const;

 private:
  mutable std::shared_mutex mutex_;
  std::unique_ptr<const PolicyModel> model_;
  std::string checkpoint_id_;
  std::uint64_t config_hash_ = 0;
  std::chrono::steady_clock::time_point started_;
};

// JSON error document {"error": {"code", "field", "message"}}.
HttpReply error_reply(int status, const std::string& code, const std::string& field, const std::string& message);

}  // namespace sw
