#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace sw {

inline constexpr const char* kWalkingPrompt =
    "Is this a first-person video of a person actively walking on foot (not standing still)? "
    "Answer strictly with 'yes' or 'no'.";

struct ClipMeta {
  std::string clip_id;
  double duration_s = 1.0;
  std::string description;
  std::optional<bool> keep;  // ground-truth label when known
};

struct FilterRequest {
  std::string prompt;
  std::string clip_id;
  std::string description;
  // One placeholder per sampled frame at 1 fps.
  std::vector<std::string> frames;
};

FilterRequest make_filter_request(const ClipMeta& clip);

// Raised by clients when the service cannot answer. Timeouts and
// unreachable endpoints are retriable.
class ClientError : public Error {
 public:
  ClientError(const std::string& m, bool retriable) : Error(ErrorCode::kIo, m), retriable_(retriable) {}
  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

class FilterClient {
 public:
  virtual ~FilterClient() = default;
  // Raw text completion for the request.
  virtual std::string complete(const FilterRequest& request) = 0;
};

// Answers from a table keyed by clip id; unknown ids raise a retriable
// ClientError, as does any id mapped to the timeout marker.
class StubFilterClient final : public FilterClient {
 public:
  static constexpr const char* kTimeout = "<timeout>";

  explicit StubFilterClient(std::map<std::string, std::string> answers) : answers_(std::move(answers)) {}
  // "yes" for clips labelled keep, "no" otherwise.
  static StubFilterClient oracle(std::span<const ClipMeta> clips);

  std::string complete(const FilterRequest& request) override;

 private:
  std::map<std::string, std::string> answers_;
};

// POSTs {"prompt", "clip_id", "description", "frames"} as JSON to
// http://host:port/complete and reads the "text" field of the reply.
class HttpFilterClient final : public FilterClient {
 public:
  HttpFilterClient(std::string host, int port, std::chrono::milliseconds timeout = std::chrono::seconds(10),
                   std::string path = "/complete");
  std::string complete(const FilterRequest& request) override;

 private:
  std::string host_;
  int port_;
  std::chrono::milliseconds timeout_;
  std::string path_;
};

enum class FilterAnswer { kYes, kNo, kUndecided, kMalformed };
const char* filter_answer_name(FilterAnswer a);

struct FilterVerdict {
  std::string clip_id;
  FilterAnswer answer = FilterAnswer::kUndecided;
  std::string raw_response;
  std::string error;       // client failure message, if any
  bool retriable = false;  // true for undecided clips worth resubmitting
};

// Lowercase, trim whitespace, drop surrounding quotes and punctuation.
std::string normalize_response(const std::string& raw);
FilterAnswer classify_response(const std::string& raw);

struct FilterResult {
  std::vector<ClipMeta> kept;
  std::vector<FilterVerdict> verdicts;
  std::vector<std::string> warnings;
};

// Keeps a clip iff its normalized answer is exactly "yes". Failed calls
// leave the clip undecided and excluded; malformed answers are excluded
// with a warning.
FilterResult filter_clips(std::span<const ClipMeta> clips, FilterClient& client);

}  // namespace sw
