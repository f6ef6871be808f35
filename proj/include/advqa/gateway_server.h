#pragma once

#include <memory>
#include <string>
#include <thread>

#include "advqa/gateway.h"

namespace advqa {

// Serves any ModelGateway over the wire protocol. Malformed requests get
// HTTP 400, gateway failures HTTP 500; both carry {"error": message}.
class GatewayServer {
 public:
  explicit GatewayServer(const ModelGateway& gateway);
  ~GatewayServer();
  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  // Binds to `port` (0 picks a free port) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Serves until stop() is called. Requires a successful bind().
  void serve();
  // bind() + serve() on a background thread. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace advqa
