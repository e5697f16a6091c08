#include "episodes/filter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <httplib.h>
#include <json.hpp>

namespace sw {

FilterRequest make_filter_request(const ClipMeta& clip) {
  if (!(clip.duration_s > 0.0)) throw ValidationError("duration_s", "clip " + clip.clip_id + " must be positive");
  FilterRequest r{kWalkingPrompt, clip.clip_id, clip.description, {}};
  const auto frames = static_cast<std::size_t>(std::max(1.0, std::floor(clip.duration_s)));
  for (std::size_t i = 0; i < frames; ++i) r.frames.push_back("<frame " + std::to_string(i) + ">");
  return r;
}

StubFilterClient StubFilterClient::oracle(std::span<const ClipMeta> clips) {
  std::map<std::string, std::string> answers;
  for (const ClipMeta& c : clips) answers[c.clip_id] = c.keep.value_or(false) ? "yes" : "no";
  return StubFilterClient(std::move(answers));
}

std::string StubFilterClient::complete(const FilterRequest& request) {
  const auto it = answers_.find(request.clip_id);
  if (it == answers_.end()) throw ClientError("no stub answer for clip " + request.clip_id, true);
  if (it->second == kTimeout) throw ClientError("timed out waiting for clip " + request.clip_id, true);
  return it->second;
}

HttpFilterClient::HttpFilterClient(std::string host, int port, std::chrono::milliseconds timeout, std::string path)
    : host_(std::move(host)), port_(port), timeout_(timeout), path_(std::move(path)) {}

std::string HttpFilterClient::complete(const FilterRequest& request) {
  httplib::Client client(host_, port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  const nlohmann::json body = {{"prompt", request.prompt},
                               {"clip_id", request.clip_id},
                               {"description", request.description},
                               {"frames", request.frames}};
  const auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw ClientError("filter service unreachable: " + httplib::to_string(res.error()), true);
  if (res->status >= 500) throw ClientError("filter service error " + std::to_string(res->status), true);
  if (res->status != 200) throw ClientError("filter service rejected request: " + std::to_string(res->status), false);
  try {
    return nlohmann::json::parse(res->body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ClientError(std::string("filter service reply is not {\"text\": ...}: ") + e.what(), false);
  }
}

const char* filter_answer_name(FilterAnswer a) {
  switch (a) {
    case FilterAnswer::kYes: return "yes";
    case FilterAnswer::kNo: return "no";
    case FilterAnswer::kUndecided: return "undecided";
    case FilterAnswer::kMalformed: return "malformed";
  }
  return "undecided";
}

std::string normalize_response(const std::string& raw) {
  std::string s;
  s.reserve(raw.size());
  for (unsigned char c : raw) s.push_back(static_cast<char>(std::tolower(c)));
  const auto strip = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
  const auto first = std::find_if_not(s.begin(), s.end(), strip);
  const auto last = std::find_if_not(s.rbegin(), s.rend(), strip).base();
  return first < last ? std::string(first, last) : std::string();
}

FilterAnswer classify_response(const std::string& raw) {
  const std::string n = normalize_response(raw);
  if (n == "yes") return FilterAnswer::kYes;
  if (n == "no") return FilterAnswer::kNo;
  return FilterAnswer::kMalformed;
}

FilterResult filter_clips(std::span<const ClipMeta> clips, FilterClient& client) {
  FilterResult out;
  out.verdicts.reserve(clips.size());
  for (const ClipMeta& clip : clips) {
    FilterVerdict v;
    v.clip_id = clip.clip_id;
    try {
      v.raw_response = client.complete(make_filter_request(clip));
      v.answer = classify_response(v.raw_response);
    } catch (const ClientError& e) {
      v.answer = FilterAnswer::kUndecided;
      v.error = e.what();
      v.retriable = e.retriable();
    }
    if (v.answer == FilterAnswer::kYes) out.kept.push_back(clip);
    if (v.answer == FilterAnswer::kMalformed) {
      out.warnings.push_back("clip " + clip.clip_id + ": response is neither yes nor no: \"" + v.raw_response + "\"");
    }
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

}  // namespace sw
