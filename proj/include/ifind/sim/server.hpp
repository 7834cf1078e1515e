#pragma once

#include <filesystem>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "ifind/sim/service.hpp"

namespace ifind::sim {

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  int port = 8765;  // 0 picks an ephemeral port
  std::optional<std::filesystem::path> static_dir;
  std::size_t subscriber_capacity = 256;
};

/// One TCP port, three kinds of client, told apart by the first line:
///   - raw NDJSON: each line is a command, each outbound message one line;
///   - HTTP `GET /ws` with an Upgrade header: the same messages as text frames;
///   - any other HTTP GET/HEAD: a file from `static_dir`.
class Server {
 public:
  Server(SimService& service, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting. Throws std::system_error when the port is unavailable.
  void start();
  void stop();
  /// The bound port (resolved after start() when 0 was requested).
  int port() const { return port_; }

 private:
  struct Connection {
    int fd;
    std::thread thread;
    bool done = false;
  };

  void accept_loop();
  void handle(Connection& c);
  void serve_stream(int fd, std::string pending, bool websocket);
  void serve_static(int fd, const std::string& method, const std::string& target);
  void reap();

  SimService& service_;
  ServerOptions options_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::thread acceptor_;
  std::mutex mu_;
  std::list<Connection> connections_;
  bool stopping_ = false;
};

}  // namespace ifind::sim
