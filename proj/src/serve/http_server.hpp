#pragma once

#include <memory>
#include <string>

#include "serve/service.hpp"

namespace sw {

// Bind address used when none is given: $SW_BIND_ADDR, else 127.0.0.1.
std::string default_bind_address();

// POST /predict and GET /health over HTTP/1.1.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<PredictService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port, throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sw
