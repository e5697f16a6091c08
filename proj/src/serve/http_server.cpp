#include "serve/http_server.hpp"

#include <cstdlib>
#include <httplib.h>

#include "common/error.hpp"

namespace sw {

std::string default_bind_address() {
  const char* env = std::getenv("SW_BIND_ADDR");
  return env && *env ? env : "127.0.0.1";
}

struct HttpServer::Impl {
  std::shared_ptr<PredictService> service;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<PredictService> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto& svc = impl_->service;
  auto reply = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Post("/predict", [svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc->handle_predict(req.body));
  });
  impl_->server.Get("/health", [svc, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->handle_health());
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace sw
