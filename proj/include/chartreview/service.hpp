#pragma once

#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "chartreview/config.hpp"
#include "chartreview/error.hpp"

namespace chartreview {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// JSON API under /api/v1. handle() is the transport-free entry point; serve()
// binds it to an HTTP listener.
class Service {
 public:
  explicit Service(Workspace& ws);
  ~Service();

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body = "",
                     const std::map<std::string, std::string>& query = {});

  // Blocks until stop(). Returns false when the address cannot be bound.
  bool serve(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serving continues on a background thread.
  int serve_background(const std::string& host);
  void stop();

 private:
  struct Server;
  Workspace& ws_;
  std::unique_ptr<Server> server_;
};

int http_status(ErrorCode code);

}  // namespace chartreview
