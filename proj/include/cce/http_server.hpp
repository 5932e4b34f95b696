#pragma once

#include <memory>
#include <string>

#include "cce/session.hpp"

namespace cce {

/// JSON-over-HTTP front end for a SessionManager.
///
///   POST /sessions                                  create
///   GET  /sessions/{id}/players/{p}/view
///   POST /sessions/{id}/players/{p}/attempts        {"items": [ids]}
///   POST /sessions/{id}/players/{p}/inspect         {"target": q}
///   POST /sessions/{id}/players/{p}/inspect-item    {"target": q, "item": id}
///   GET  /sessions/{id}/log                         JSON-lines
///   GET  /sessions/{id}/events?from=n&follow=0|1    server-sent events
class HttpServer {
 public:
  explicit HttpServer(SessionManager& sessions);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and returns the port (pass 0 for an ephemeral one); -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); also runs a ticker that advances bots once a second.
  bool serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cce
