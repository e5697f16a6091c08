#include "swnav/swnav.h"

#include <chrono>
#include <cstring>
#include <json.hpp>
#include <memory>
#include <string>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "episodes/dataset.hpp"
#include "episodes/filter.hpp"
#include "metrics/metrics.hpp"
#include "pipeline/pipeline.hpp"
#include "policy/checkpoint.hpp"
#include "serve/http_server.hpp"
#include "serve/protocol.hpp"
#include "serve/service.hpp"

struct sw_world {
  sw::World world;
};

struct sw_dataset {
  sw::Dataset dataset;
};

struct sw_model {
  sw::PolicyModel model;
};

struct sw_server {
  std::shared_ptr<sw::PredictService> service;
  std::unique_ptr<sw::HttpServer> http;
};

namespace {

using json = nlohmann::ordered_json;

thread_local std::string g_last_error;

class ArgumentError : public sw::Error {
 public:
  explicit ArgumentError(const std::string& m) : sw::Error(sw::ErrorCode::kInvalidArgument, m) {}
};

template <typename Fn>
sw_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SW_OK;
  } catch (const sw::Error& e) {
    g_last_error = e.what();
    return static_cast<sw_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON argument: ") + e.what();
    return SW_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SW_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SW_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw ArgumentError(std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json options_of(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json doc = json::parse(text);
  if (!doc.is_object()) throw ArgumentError("options must be a JSON object");
  return doc;
}

sw::WorldOptions world_options(const json& o, sw::WorldOptions w = {}) {
  w.size_m = o.value("size_m", w.size_m);
  w.obstacles = o.value("obstacles", w.obstacles);
  w.agents = o.value("agents", w.agents);
  w.min_obstacle_half = o.value("min_obstacle_half", w.min_obstacle_half);
  w.max_obstacle_half = o.value("max_obstacle_half", w.max_obstacle_half);
  return w;
}

sw::SubgoalMode subgoal_mode(const json& o) {
  const std::string mode = o.value("subgoal_mode", std::string("line_of_sight"));
  if (mode == "line_of_sight") return sw::SubgoalMode::kLineOfSight;
  if (mode == "uniform") return sw::SubgoalMode::kUniformAhead;
  throw ArgumentError("subgoal_mode must be \"line_of_sight\" or \"uniform\"");
}

sw::SampleOptions sample_options(const json& o, std::uint64_t default_seed) {
  sw::SampleOptions s;
  s.subgoal_mode = subgoal_mode(o);
  s.subgoal_seed = o.value("subgoal_seed", default_seed);
  return s;
}

}  // namespace

extern "C" {

const char* sw_version(void) { return "1.0.0"; }

const char* sw_status_name(sw_status status) {
  if (status == SW_OK) return "ok";
  return sw::error_code_name(static_cast<sw::ErrorCode>(status));
}

const char* sw_last_error(void) { return g_last_error.c_str(); }

void sw_string_free(char* s) { delete[] s; }

sw_status sw_world_generate(uint64_t seed, const char* options_json, sw_world** out) {
  return guarded([&] {
    require(out, "out");
    auto w = std::make_unique<sw_world>(sw_world{sw::generate_world(seed, world_options(options_of(options_json)))});
    *out = w.release();
  });
}

sw_status sw_world_load(const char* path, sw_world** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto w = std::make_unique<sw_world>(sw_world{sw::load_world(path)});
    *out = w.release();
  });
}

sw_status sw_world_save(const sw_world* world, const char* path) {
  return guarded([&] {
    require(world, "world");
    require(path, "path");
    sw::save_world(path, world->world);
  });
}

sw_status sw_world_to_json(const sw_world* world, char** out_json) {
  return guarded([&] {
    require(world, "world");
    require(out_json, "out_json");
    *out_json = dup_string(sw::world_to_json(world->world));
  });
}

void sw_world_free(sw_world* world) { delete world; }

sw_status sw_dataset_generate(const char* options_json, sw_dataset** out) {
  return guarded([&] {
    require(out, "out");
    const json o = options_of(options_json);
    sw::DatasetOptions d;
    d.episodes = o.value("episodes", d.episodes);
    d.length_s = o.value("length_s", d.length_s);
    d.seed = o.value("seed", d.seed);
    d.worlds = o.value("worlds", d.worlds);
    d.world = world_options(o, d.world);
    auto ds = std::make_unique<sw_dataset>(sw_dataset{sw::generate_dataset(d)});
    *out = ds.release();
  });
}

sw_status sw_dataset_load(const char* path, sw_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto ds = std::make_unique<sw_dataset>(sw_dataset{sw::load_dataset(path)});
    *out = ds.release();
  });
}

sw_status sw_dataset_save(const sw_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    sw::save_dataset(path, dataset->dataset);
  });
}

sw_status sw_dataset_counts(const sw_dataset* dataset, size_t* episodes, size_t* worlds) {
  return guarded([&] {
    require(dataset, "dataset");
    if (episodes) *episodes = dataset->dataset.episodes.size();
    if (worlds) *worlds = dataset->dataset.worlds.size();
  });
}

sw_status sw_dataset_world(const sw_dataset* dataset, size_t index, sw_world** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    if (index >= dataset->dataset.worlds.size()) throw ArgumentError("world index out of range");
    *out = new sw_world{dataset->dataset.worlds[index]};
  });
}

void sw_dataset_free(sw_dataset* dataset) { delete dataset; }

sw_status sw_model_create(const char* preset, uint64_t seed, sw_model** out) {
  return guarded([&] {
    require(preset, "preset");
    require(out, "out");
    *out = new sw_model{sw::PolicyModel(sw::ModelConfig::preset(preset), seed)};
  });
}

sw_status sw_model_create_from_config(const char* config_json, uint64_t seed, sw_model** out) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out, "out");
    *out = new sw_model{sw::PolicyModel(sw::config_from_json(config_json), seed)};
  });
}

sw_status sw_model_load(const char* path, sw_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sw_model{sw::load_checkpoint(path)};
  });
}

sw_status sw_model_save(const sw_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    sw::save_checkpoint(path, model->model);
  });
}

sw_status sw_model_config_json(const sw_model* model, char** out_json) {
  return guarded([&] {
    require(model, "model");
    require(out_json, "out_json");
    *out_json = dup_string(sw::config_to_json(model->model.config()));
  });
}

sw_status sw_model_predict_json(const sw_model* model, const char* request_json, char** out_response_json) {
  return guarded([&] {
    require(model, "model");
    require(request_json, "request_json");
    require(out_response_json, "out_response_json");
    const auto t0 = std::chrono::steady_clock::now();
    const sw::PredictRequest req = sw::parse_predict_request(request_json);
    const sw::ModelConfig& config = model->model.config();
    req.window.validate(config.context_n);
    sw::PerceptionConfig pc = config.perception;
    pc.mode = req.mode;
    const sw::ModelInput input{sw::perceive(*sw::request_provider(req), pc, req.window.frames),
                               req.window.positions, req.window.subgoal};
    sw::PredictResponse resp;
    resp.output = model->model.predict(input);
    resp.model_id = sw::checkpoint_id(sw::encode_checkpoint(model->model));
    resp.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    *out_response_json = dup_string(sw::predict_response_to_json(resp));
  });
}

void sw_model_free(sw_model* model) { delete model; }

sw_status sw_train(sw_model* model, const sw_dataset* dataset, const char* options_json, sw_progress_fn progress,
                   void* user, char** out_summary_json) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    const json o = options_of(options_json);
    sw::TrainOptions t;
    t.steps = o.value("steps", t.steps);
    t.batch_size = o.value("batch_size", t.batch_size);
    t.lr = o.value("lr", t.lr);
    t.seed = o.value("seed", t.seed);
    t.warmup_steps = o.value("warmup_steps", t.warmup_steps);
    t.weight_decay = o.value("weight_decay", t.weight_decay);
    if (progress) t.on_step = [progress, user](std::size_t step, double loss) { progress(step, loss, user); };
    const auto t0 = std::chrono::steady_clock::now();
    const sw::SampleSet set = sw::build_samples(dataset->dataset, model->model.config(), sample_options(o, t.seed));
    if (set.size() == 0) throw sw::EmptySetError("dataset yields no training windows");
    const double initial = sw::mean_loss(model->model, set.samples);
    sw::train(model->model, set.samples, t);
    const double final_loss = sw::mean_loss(model->model, set.samples);
    if (out_summary_json) {
      json s;
      s["samples"] = set.size();
      s["steps"] = t.steps;
      s["initial_loss"] = initial;
      s["final_loss"] = final_loss;
      s["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      *out_summary_json = dup_string(s.dump());
    }
  });
}

sw_status sw_evaluate(const sw_model* model, const sw_dataset* dataset, const char* options_json,
                      const char* report_path, char** out_report_json) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    const json o = options_of(options_json);
    const double radius = o.value("radius_m", model->model.config().arrival_radius_m);
    if (!(radius > 0.0)) throw sw::ValidationError("radius", "must be positive");
    const std::size_t k = o.value("k", std::size_t{0});
    const sw::SampleSet set = sw::build_samples(dataset->dataset, model->model.config(), sample_options(o, 2));
    const sw::MetricsReport report = sw::aggregate(sw::evaluate_model(model->model, set), radius, k);
    if (report_path) sw::save_report(report_path, report);
    if (out_report_json) *out_report_json = dup_string(sw::report_to_json(report));
  });
}

sw_status sw_rollout(const sw_model* model, const sw_world* world, const char* options_json,
                     const char* trajectory_path, char** out_summary_json) {
  return guarded([&] {
    require(world, "world");
    const json o = options_of(options_json);
    sw::RouteSuiteOptions suite;
    suite.routes = o.value("routes", suite.routes);
    suite.seed = o.value("seed", suite.seed);
    suite.min_separation_m = o.value("min_separation_m", suite.min_separation_m);
    suite.step_factor = o.value("step_factor", suite.step_factor);
    suite.step_slack = o.value("step_slack", suite.step_slack);
    const std::string kind = o.value("policy", std::string("model"));
    std::unique_ptr<sw::NavPolicy> policy;
    sw::RolloutOptions ro;
    if (kind == "model") {
      require(model, "model");
      auto provider = std::make_shared<sw::SceneProvider>(std::make_shared<sw::World>(world->world));
      policy = std::make_unique<sw::ModelPolicy>(model->model, provider);
      ro.context_n = model->model.config().context_n;
      ro.subgoal_radius_m = model->model.config().arrival_radius_m;
    } else if (kind == "oracle") {
      policy = std::make_unique<sw::OraclePolicy>();
    } else if (kind == "zero") {
      policy = std::make_unique<sw::ZeroPolicy>();
    } else {
      throw ArgumentError("policy must be \"model\", \"oracle\" or \"zero\"");
    }
    const auto routes = sw::sample_routes(world->world, suite);
    const auto runs = sw::run_routes(*policy, world->world, routes, suite, ro);
    if (trajectory_path) sw::write_text_atomic(trajectory_path, sw::trajectories_to_tsv(runs));
    if (out_summary_json) {
      std::size_t ok = 0, collisions = 0, timeouts = 0;
      bool monotone = true;
      for (const sw::RouteRun& r : runs) {
        ok += r.result.success() ? 1 : 0;
        collisions += r.result.outcome == sw::RolloutOutcome::kCollision ? 1 : 0;
        timeouts += r.result.outcome == sw::RolloutOutcome::kTimeout ? 1 : 0;
        const auto& idx = r.result.subgoal_indices;
        for (std::size_t i = 1; i < idx.size(); ++i) monotone = monotone && idx[i] >= idx[i - 1];
      }
      json s;
      s["policy"] = kind;
      s["routes"] = runs.size();
      s["successes"] = ok;
      s["collisions"] = collisions;
      s["timeouts"] = timeouts;
      s["success_rate"] = runs.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(runs.size());
      s["subgoal_index_monotone"] = monotone;
      *out_summary_json = dup_string(s.dump());
    }
  });
}

sw_status sw_filter_clips(const char* clips_json, const char* options_json, char** out_result_json) {
  return guarded([&] {
    require(clips_json, "clips_json");
    require(out_result_json, "out_result_json");
    const json doc = json::parse(clips_json);
    if (!doc.is_array()) throw sw::ValidationError("clips", "must be an array");
    std::vector<sw::ClipMeta> clips;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const json& c = doc[i];
      const std::string path = "clips[" + std::to_string(i) + "]";
      if (!c.is_object() || !c.contains("clip_id") || !c["clip_id"].is_string()) {
        throw sw::ValidationError(path + ".clip_id", "must be a string");
      }
      sw::ClipMeta m;
      m.clip_id = c["clip_id"].get<std::string>();
      m.duration_s = c.value("duration_s", m.duration_s);
      m.description = c.value("description", std::string());
      if (c.contains("keep") && c["keep"].is_boolean()) m.keep = c["keep"].get<bool>();
      clips.push_back(std::move(m));
    }
    const json o = options_of(options_json);
    const std::string kind = o.value("client", std::string("oracle"));
    std::unique_ptr<sw::FilterClient> client;
    if (kind == "oracle") {
      client = std::make_unique<sw::StubFilterClient>(sw::StubFilterClient::oracle(clips));
    } else if (kind == "stub") {
      client = std::make_unique<sw::StubFilterClient>(
          o.value("answers", json::object()).get<std::map<std::string, std::string>>());
    } else if (kind == "http") {
      client = std::make_unique<sw::HttpFilterClient>(o.value("host", std::string("127.0.0.1")), o.value("port", 8090),
                                                      std::chrono::milliseconds(o.value("timeout_ms", 10000)));
    } else {
      throw ArgumentError("client must be \"oracle\", \"stub\" or \"http\"");
    }
    const sw::FilterResult result = sw::filter_clips(clips, *client);
    json r;
    r["kept"] = json::array();
    for (const sw::ClipMeta& c : result.kept) r["kept"].push_back(c.clip_id);
    r["verdicts"] = json::array();
    for (const sw::FilterVerdict& v : result.verdicts) {
      r["verdicts"].push_back({{"clip_id", v.clip_id},
                               {"answer", sw::filter_answer_name(v.answer)},
                               {"raw_response", v.raw_response},
                               {"error", v.error},
                               {"retriable", v.retriable}});
    }
    r["warnings"] = result.warnings;
    *out_result_json = dup_string(r.dump());
  });
}

sw_status sw_server_create(const char* checkpoint_path, sw_server** out) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<sw_server>();
    s->service = std::make_shared<sw::PredictService>();
    if (checkpoint_path) s->service->load_checkpoint_file(checkpoint_path);
    s->http = std::make_unique<sw::HttpServer>(s->service);
    *out = s.release();
  });
}

sw_status sw_server_load(sw_server* server, const char* checkpoint_path) {
  return guarded([&] {
    require(server, "server");
    require(checkpoint_path, "checkpoint_path");
    server->service->load_checkpoint_file(checkpoint_path);
  });
}

sw_status sw_server_bind(sw_server* server, const char* host, int port, int* out_port) {
  return guarded([&] {
    require(server, "server");
    if (port < 0 || port > 65535) throw sw::ValidationError("port", "must lie in [0, 65535]");
    const int bound = server->http->bind(host ? host : sw::default_bind_address(), port);
    if (out_port) *out_port = bound;
  });
}

sw_status sw_server_run(sw_server* server) {
  return guarded([&] {
    require(server, "server");
    server->http->serve();
  });
}

sw_status sw_server_stop(sw_server* server) {
  return guarded([&] {
    require(server, "server");
    server->http->stop();
  });
}

sw_status sw_server_handle(sw_server* server, const char* method, const char* path, const char* body,
                           int* out_http_status, char** out_body) {
  return guarded([&] {
    require(server, "server");
    require(method, "method");
    require(path, "path");
    require(out_http_status, "out_http_status");
    require(out_body, "out_body");
    const std::string m = method, p = path;
    sw::HttpReply reply;
    if (m == "GET" && p == "/health") {
      reply = server->service->handle_health();
    } else if (m == "POST" && p == "/predict") {
      reply = server->service->handle_predict(body ? body : "");
    } else {
      reply = sw::error_reply(404, "not_found", "", m + " " + p + " is not routed");
    }
    *out_http_status = reply.status;
    *out_body = dup_string(reply.body);
  });
}

void sw_server_free(sw_server* server) {
  if (server && server->http) server->http->stop();
  delete server;
}

}  // extern "C"
