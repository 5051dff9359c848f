#pragma once

#include <memory>
#include <string>
#include <thread>

#include "saic/backends.hpp"

namespace httplib {
class Server;
}

namespace saic::protocol {

/// Serves the v1 endpoints over a BackendSet. Used for conformance fixtures
/// and to expose the reference backends to out-of-process clients.
class ProtocolServer {
 public:
  explicit ProtocolServer(backends::BackendSet backends);
  ~ProtocolServer();
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  /// Binds to host:port (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks serving on the calling thread.
  void listen_blocking(const std::string& host, int port);
  void stop();

  std::string url() const;

 private:
  void install_routes();

  backends::BackendSet backends_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

}  // namespace saic::protocol
