#include <CLI11.hpp>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <pthread.h>
#include <sstream>
#include <string>
#include <thread>

#include "swnav/swnav.h"

namespace {

using json = nlohmann::json;

// Exit 2 for bad input, 1 for everything else.
int fail(sw_status status) {
  std::fprintf(stderr, "error (%s): %s\n", sw_status_name(status), sw_last_error());
  switch (status) {
    case SW_ERR_INVALID_ARGUMENT:
    case SW_ERR_VALIDATION:
    case SW_ERR_FORMAT:
    case SW_ERR_CONFIG:
    case SW_ERR_DIMENSION:
      return 2;
    default:
      return 1;
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  sw_string_free(s);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path);
}

struct WorldArgs {
  std::uint64_t seed = 1;
  std::string out;
  int agents = 3;
  int obstacles = 10;
  double size = 40.0;
};

int cmd_world(const WorldArgs& a) {
  const std::string opts = json{{"agents", a.agents}, {"obstacles", a.obstacles}, {"size_m", a.size}}.dump();
  sw_world* world = nullptr;
  if (sw_status s = sw_world_generate(a.seed, opts.c_str(), &world); s != SW_OK) return fail(s);
  const sw_status s = sw_world_save(world, a.out.c_str());
  sw_world_free(world);
  if (s != SW_OK) return fail(s);
  std::printf("wrote %s\n", a.out.c_str());
  return 0;
}

struct GenerateArgs {
  std::size_t episodes = 64;
  double length = 20.0;
  std::uint64_t seed = 1;
  std::size_t worlds = 4;
  int agents = 3;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  const std::string opts = json{{"episodes", a.episodes},
                                {"length_s", a.length},
                                {"seed", a.seed},
                                {"worlds", a.worlds},
                                {"agents", a.agents}}
                               .dump();
  sw_dataset* ds = nullptr;
  if (sw_status s = sw_dataset_generate(opts.c_str(), &ds); s != SW_OK) return fail(s);
  const sw_status s = sw_dataset_save(ds, a.out.c_str());
  std::size_t episodes = 0, worlds = 0;
  sw_dataset_counts(ds, &episodes, &worlds);
  sw_dataset_free(ds);
  if (s != SW_OK) return fail(s);
  std::printf("wrote %s: %zu episodes over %zu worlds\n", a.out.c_str(), episodes, worlds);
  return 0;
}

struct TrainArgs {
  std::string dataset;
  std::string checkpoint;
  std::string resume;
  std::string preset = "toy";
  std::size_t steps = 2000;
  std::size_t batch = 8;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  std::string subgoal_mode = "line_of_sight";
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  sw_dataset* ds = nullptr;
  if (sw_status s = sw_dataset_load(a.dataset.c_str(), &ds); s != SW_OK) return fail(s);
  sw_model* model = nullptr;
  sw_status s = a.resume.empty() ? sw_model_create(a.preset.c_str(), a.seed, &model)
                                 : sw_model_load(a.resume.c_str(), &model);
  if (s != SW_OK) {
    sw_dataset_free(ds);
    return fail(s);
  }
  const std::string opts = json{{"steps", a.steps},
                                {"batch_size", a.batch},
                                {"lr", a.lr},
                                {"seed", a.seed},
                                {"subgoal_mode", a.subgoal_mode}}
                               .dump();
  auto progress = [](std::size_t step, double loss, void*) {
    if (step % 100 == 0) std::fprintf(stderr, "step %zu loss %.4f\n", step, loss);
  };
  char* summary = nullptr;
  s = sw_train(model, ds, opts.c_str(), a.quiet ? nullptr : +progress, nullptr, &summary);
  if (s == SW_OK) s = sw_model_save(model, a.checkpoint.c_str());
  sw_model_free(model);
  sw_dataset_free(ds);
  if (s != SW_OK) return fail(s);
  std::printf("%s\n", take(summary).c_str());
  return 0;
}

struct EvalArgs {
  std::string dataset;
  std::string checkpoint;
  double radius = 1.0;
  std::size_t k = 0;
  std::string subgoal_mode = "line_of_sight";
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  sw_dataset* ds = nullptr;
  if (sw_status s = sw_dataset_load(a.dataset.c_str(), &ds); s != SW_OK) return fail(s);
  sw_model* model = nullptr;
  if (sw_status s = sw_model_load(a.checkpoint.c_str(), &model); s != SW_OK) {
    sw_dataset_free(ds);
    return fail(s);
  }
  const std::string opts = json{{"radius_m", a.radius}, {"k", a.k}, {"subgoal_mode", a.subgoal_mode}}.dump();
  char* report = nullptr;
  const sw_status s = sw_evaluate(model, ds, opts.c_str(), a.out.empty() ? nullptr : a.out.c_str(), &report);
  sw_model_free(model);
  sw_dataset_free(ds);
  if (s != SW_OK) return fail(s);
  std::printf("%s\n", take(report).c_str());
  return 0;
}

struct RolloutArgs {
  std::string world;
  std::string checkpoint;
  std::size_t routes = 50;
  std::uint64_t seed = 1;
  std::string policy = "model";
  std::string out;
};

int cmd_rollout(const RolloutArgs& a) {
  sw_world* world = nullptr;
  if (sw_status s = sw_world_load(a.world.c_str(), &world); s != SW_OK) return fail(s);
  sw_model* model = nullptr;
  if (a.policy == "model") {
    if (a.checkpoint.empty()) {
      sw_world_free(world);
      std::fprintf(stderr, "error: --checkpoint is required for the model policy\n");
      return 2;
    }
    if (sw_status s = sw_model_load(a.checkpoint.c_str(), &model); s != SW_OK) {
      sw_world_free(world);
      return fail(s);
    }
  }
  const std::string opts = json{{"routes", a.routes}, {"seed", a.seed}, {"policy", a.policy}}.dump();
  char* summary = nullptr;
  const sw_status s = sw_rollout(model, world, opts.c_str(), a.out.empty() ? nullptr : a.out.c_str(), &summary);
  sw_model_free(model);
  sw_world_free(world);
  if (s != SW_OK) return fail(s);
  std::printf("%s\n", take(summary).c_str());
  return 0;
}

struct ServeArgs {
  std::string checkpoint;
  std::string host;
  int port = 8080;
};

int cmd_serve(const ServeArgs& a) {
  // Signals go to a dedicated sigwait in this thread, never to the server.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  sw_server* server = nullptr;
  if (sw_status s = sw_server_create(a.checkpoint.empty() ? nullptr : a.checkpoint.c_str(), &server); s != SW_OK) {
    return fail(s);
  }
  int bound = 0;
  if (sw_status s = sw_server_bind(server, a.host.empty() ? nullptr : a.host.c_str(), a.port, &bound); s != SW_OK) {
    sw_server_free(server);
    return fail(s);
  }
  std::printf("listening on port %d\n", bound);
  std::fflush(stdout);
  std::thread worker([server] { sw_server_run(server); });
  int sig = 0;
  sigwait(&set, &sig);
  sw_server_stop(server);
  worker.join();
  sw_server_free(server);
  return 0;
}

struct FilterArgs {
  std::string clips;
  std::string client = "oracle";
  std::string answers;
  std::string endpoint = "127.0.0.1:8090";
  int timeout_ms = 10000;
  std::string out;
};

int cmd_filter(const FilterArgs& a) {
  json opts{{"client", a.client}, {"timeout_ms", a.timeout_ms}};
  if (!a.answers.empty()) opts["answers"] = json::parse(read_text(a.answers));
  const auto colon = a.endpoint.rfind(':');
  if (colon == std::string::npos) {
    std::fprintf(stderr, "error: --endpoint must be host:port\n");
    return 2;
  }
  opts["host"] = a.endpoint.substr(0, colon);
  opts["port"] = std::stoi(a.endpoint.substr(colon + 1));
  const std::string clips = read_text(a.clips);
  char* result = nullptr;
  if (sw_status s = sw_filter_clips(clips.c_str(), opts.dump().c_str(), &result); s != SW_OK) return fail(s);
  const std::string text = take(result);
  const json doc = json::parse(text);
  if (!a.out.empty()) write_text(a.out, doc.dump(2) + "\n");
  std::printf("kept %zu of %zu clips\n", doc["kept"].size(), doc["verdicts"].size());
  for (const auto& w : doc["warnings"]) std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
  return 0;
}

struct PredictArgs {
  std::string checkpoint;
  std::string request;
};

int cmd_predict(const PredictArgs& a) {
  sw_model* model = nullptr;
  if (sw_status s = sw_model_load(a.checkpoint.c_str(), &model); s != SW_OK) return fail(s);
  const std::string body = read_text(a.request);
  char* response = nullptr;
  const sw_status s = sw_model_predict_json(model, body.c_str(), &response);
  sw_model_free(model);
  if (s != SW_OK) return fail(s);
  std::printf("%s\n", take(response).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swctl: data generation, training, evaluation, rollout and serving"};
  app.require_subcommand(1);
  int code = 0;

  WorldArgs world;
  auto* w = app.add_subcommand("world", "generate a world file");
  w->add_option("--seed", world.seed, "world seed");
  w->add_option("--agents", world.agents, "moving agents")->check(CLI::NonNegativeNumber);
  w->add_option("--obstacles", world.obstacles, "obstacle count")->check(CLI::NonNegativeNumber);
  w->add_option("--size", world.size, "side length in meters")->check(CLI::PositiveNumber);
  w->add_option("--out", world.out, "world JSON path")->required();
  w->callback([&] { code = cmd_world(world); });

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "generate a synthetic episode dataset");
  g->add_option("--episodes", gen.episodes, "episode count");
  g->add_option("--length", gen.length, "episode length in seconds")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "dataset seed");
  g->add_option("--worlds", gen.worlds, "distinct worlds")->check(CLI::PositiveNumber);
  g->add_option("--agents", gen.agents, "moving agents per world")->check(CLI::NonNegativeNumber);
  g->add_option("--out", gen.out, "SWEP output path")->required();
  g->callback([&] { code = cmd_generate(gen); });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train a policy on a dataset");
  t->add_option("--dataset", tr.dataset, "SWEP dataset")->required();
  t->add_option("--checkpoint", tr.checkpoint, "SWCK output path")->required();
  t->add_option("--resume", tr.resume, "start from this checkpoint instead of a fresh preset");
  t->add_option("--preset", tr.preset, "model preset")->check(CLI::IsMember({"tiny", "toy", "desk", "full"}));
  t->add_option("--steps", tr.steps, "optimizer steps");
  t->add_option("--batch", tr.batch, "batch size")->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.lr, "peak learning rate")->check(CLI::PositiveNumber);
  t->add_option("--seed", tr.seed, "init and shuffle seed");
  t->add_option("--subgoal-mode", tr.subgoal_mode, "sub-goal sampling")
      ->check(CLI::IsMember({"line_of_sight", "uniform"}));
  t->add_flag("--quiet", tr.quiet, "no progress lines");
  t->callback([&] { code = cmd_train(tr); });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "offline metrics report");
  e->add_option("--dataset", ev.dataset, "SWEP dataset")->required();
  e->add_option("--checkpoint", ev.checkpoint, "SWCK checkpoint")->required();
  e->add_option("--radius", ev.radius, "arrival radius in meters");
  e->add_option("--k", ev.k, "arrival step budget, 0 for the full horizon");
  e->add_option("--subgoal-mode", ev.subgoal_mode, "sub-goal sampling")
      ->check(CLI::IsMember({"line_of_sight", "uniform"}));
  e->add_option("--out", ev.out, "TSV report path (a .json mirror is written next to it)");
  e->callback([&] { code = cmd_eval(ev); });

  RolloutArgs ro;
  auto* r = app.add_subcommand("rollout", "closed-loop navigation over planned routes");
  r->add_option("--world", ro.world, "world JSON")->required();
  r->add_option("--checkpoint", ro.checkpoint, "SWCK checkpoint");
  r->add_option("--routes", ro.routes, "route count");
  r->add_option("--seed", ro.seed, "route sampling seed");
  r->add_option("--policy", ro.policy, "policy")->check(CLI::IsMember({"model", "oracle", "zero"}));
  r->add_option("--out", ro.out, "per-step trajectory TSV");
  r->callback([&] { code = cmd_rollout(ro); });

  ServeArgs sv;
  auto* s = app.add_subcommand("serve", "HTTP /predict and /health");
  s->add_option("--checkpoint", sv.checkpoint, "SWCK checkpoint");
  s->add_option("--port", sv.port, "TCP port, 0 for any")->check(CLI::Range(0, 65535));
  s->add_option("--host", sv.host, "bind address (default $SW_BIND_ADDR or 127.0.0.1)");
  s->callback([&] { code = cmd_serve(sv); });

  FilterArgs fl;
  auto* f = app.add_subcommand("filter", "keep walking clips via a yes/no completion service");
  f->add_option("--clips", fl.clips, "clip list JSON")->required();
  f->add_option("--client", fl.client, "client")->check(CLI::IsMember({"oracle", "stub", "http"}));
  f->add_option("--answers", fl.answers, "stub answers JSON {clip_id: text}");
  f->add_option("--endpoint", fl.endpoint, "host:port of the completion service");
  f->add_option("--timeout-ms", fl.timeout_ms, "per-request timeout")->check(CLI::PositiveNumber);
  f->add_option("--out", fl.out, "result JSON path");
  f->callback([&] { code = cmd_filter(fl); });

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "answer one /predict request document offline");
  p->add_option("--checkpoint", pr.checkpoint, "SWCK checkpoint")->required();
  p->add_option("--request", pr.request, "request JSON path")->required();
  p->callback([&] { code = cmd_predict(pr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return code;
}
