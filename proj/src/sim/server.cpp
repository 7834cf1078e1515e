#include "ifind/sim/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "ifind/common/error.hpp"
#include "ifind/sim/websocket.hpp"

namespace ifind::sim {
namespace {

constexpr std::size_t kMaxHeader = 16 * 1024;
constexpr std::size_t kMaxLine = 1 << 20;

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}

  bool send_all(std::string_view data) {
    std::lock_guard lock(write_mu_);
    if (broken_) return false;
    while (!data.empty()) {
      const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        broken_ = true;
        ::shutdown(fd_, SHUT_RDWR);
        return false;
      }
      data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
  }

  // Appends whatever arrives to `buf`; false on EOF or error.
  bool recv_some(std::string& buf) {
    char chunk[4096];
    for (;;) {
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buf.append(chunk, static_cast<std::size_t>(n));
      return true;
    }
  }

  int fd() const { return fd_; }

 private:
  int fd_;
  std::mutex write_mu_;
  bool broken_ = false;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

struct HttpRequest {
  std::string method;
  std::string target;
  std::map<std::string, std::string> headers;  // lower-case names
};

std::optional<HttpRequest> parse_http_head(const std::string& head) {
  std::istringstream in(head);
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  HttpRequest r;
  std::istringstream first(line);
  std::string version;
  if (!(first >> r.method >> r.target >> version)) return std::nullopt;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    r.headers[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 1));
  }
  return r;
}

bool looks_like_http(std::string_view buf) {
  for (std::string_view m : {"GET ", "HEAD ", "POST ", "PUT ", "DELETE ", "OPTIONS "})
    if (buf.substr(0, m.size()) == m) return true;
  return false;
}

std::string content_type(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> types = {
      {".html", "text/html; charset=utf-8"}, {".js", "text/javascript"},
      {".mjs", "text/javascript"},           {".css", "text/css"},
      {".json", "application/json"},         {".svg", "image/svg+xml"},
      {".png", "image/png"},                 {".ico", "image/x-icon"},
      {".map", "application/json"},          {".txt", "text/plain; charset=utf-8"},
      {".wasm", "application/wasm"},
  };
  const auto it = types.find(lower(p.extension().string()));
  return it == types.end() ? "application/octet-stream" : it->second;
}

std::string http_response(int status, std::string_view reason, std::string_view type,
                          const std::string& body, bool include_body) {
  std::ostringstream o;
  o << "HTTP/1.1 " << status << ' ' << reason << "\r\n"
    << "Content-Type: " << type << "\r\n"
    << "Content-Length: " << body.size() << "\r\n"
    << "Connection: close\r\n\r\n";
  if (include_body) o << body;
  return o.str();
}

void reply_parse_error(SimService& service, Subscription& sub, const std::string& line,
                       const std::string& message) {
  Reply r;
  r.ok = false;
  r.code = std::string(to_string(ErrorCode::ParseError));
  r.message = message;
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_object() && j.contains("request_id")) r.request_id = j.at("request_id");
  sub.push_reply(r.to_json(service.tick()).dump());
}

}  // namespace

Server::Server(SimService& service, ServerOptions options)
    : service_(service), options_(std::move(options)) {}

Server::~Server() { stop(); }

void Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::system_error(errno, std::generic_category(), "socket");
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::inet_pton(AF_INET, options_.bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(EINVAL, std::generic_category(), "bind address " + options_.bind_address);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(listen_fd_, 16) < 0) {
    const int err = errno;
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(err, std::generic_category(), "listen on port " + std::to_string(options_.port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ || listen_fd_ < 0) return;
    stopping_ = true;
    ::shutdown(listen_fd_, SHUT_RDWR);
    for (auto& c : connections_) ::shutdown(c.fd, SHUT_RDWR);
  }
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  for (auto& c : connections_) {
    if (c.thread.joinable()) c.thread.join();
    ::close(c.fd);
  }
  connections_.clear();
}

void Server::reap() {
  std::lock_guard lock(mu_);
  for (auto it = connections_.begin(); it != connections_.end();) {
    if (it->done) {
      it->thread.join();
      ::close(it->fd);
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    reap();
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    auto& c = connections_.emplace_back();
    c.fd = fd;
    c.thread = std::thread([this, &c] {
      handle(c);
      std::lock_guard done_lock(mu_);
      c.done = true;
    });
  }
}

void Server::handle(Connection& c) {
  Socket sock(c.fd);
  std::string buf;
  // A client that stays silent is a raw NDJSON telemetry listener.
  pollfd p{c.fd, POLLIN, 0};
  if (::poll(&p, 1, 250) > 0 && !sock.recv_some(buf)) return;
  if (!looks_like_http(buf)) {
    serve_stream(c.fd, std::move(buf), false);
    return;
  }
  std::size_t end;
  while ((end = buf.find("\r\n\r\n")) == std::string::npos) {
    if (buf.size() > kMaxHeader || !sock.recv_some(buf)) return;
  }
  const auto req = parse_http_head(buf.substr(0, end));
  std::string rest = buf.substr(end + 4);
  if (!req) {
    sock.send_all(http_response(400, "Bad Request", "text/plain", "bad request\n", true));
    return;
  }
  const auto upgrade = req->headers.find("upgrade");
  const auto key = req->headers.find("sec-websocket-key");
  const std::string path = req->target.substr(0, req->target.find('?'));
  if (path == "/ws" && upgrade != req->headers.end() && lower(upgrade->second) == "websocket" &&
      key != req->headers.end()) {
    const std::string accept =
        "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
        "Sec-WebSocket-Accept: " + ws::accept_key(key->second) + "\r\n\r\n";
    if (!sock.send_all(accept)) return;
    serve_stream(c.fd, std::move(rest), true);
    return;
  }
  serve_static(c.fd, req->method, req->target);
}

void Server::serve_stream(int fd, std::string pending, bool websocket) {
  Socket sock(fd);
  auto sub = service_.subscribe(options_.subscriber_capacity);

  std::thread writer([&] {
    for (;;) {
      auto msg = sub->pop(std::chrono::milliseconds(100));
      if (!msg) {
        if (sub->closed()) return;
        continue;
      }
      const bool sent = websocket ? sock.send_all(ws::encode({true, ws::Opcode::Text, *msg}))
                                  : sock.send_all(*msg + "\n");
      if (!sent) return;
    }
  });

  auto handle_line = [&](const std::string& raw) {
    const std::string line = trim(raw);
    if (line.empty()) return;
    try {
      service_.submit(parse_command_line(line), sub);
    } catch (const Error& e) {
      reply_parse_error(service_, *sub, line, e.what());
    }
  };

  std::string buf = std::move(pending);
  std::string message;  // websocket message being reassembled
  bool open = true;
  while (open) {
    if (websocket) {
      while (auto decoded = ws::decode(buf)) {
        auto& [frame, used] = *decoded;
        buf.erase(0, used);
        switch (frame.opcode) {
          case ws::Opcode::Text:
          case ws::Opcode::Binary:
          case ws::Opcode::Continuation:
            message += frame.payload;
            if (frame.fin) {
              std::istringstream lines(message);
              for (std::string l; std::getline(lines, l);) handle_line(l);
              message.clear();
            }
            break;
          case ws::Opcode::Ping:
            sock.send_all(ws::encode({true, ws::Opcode::Pong, frame.payload}));
            break;
          case ws::Opcode::Pong:
            break;
          case ws::Opcode::Close:
            sock.send_all(ws::encode({true, ws::Opcode::Close, frame.payload.substr(0, 2)}));
            open = false;
            break;
        }
        if (!open) break;
      }
      if (message.size() > kMaxLine) break;
    } else {
      std::size_t nl;
      while ((nl = buf.find('\n')) != std::string::npos) {
        handle_line(buf.substr(0, nl));
        buf.erase(0, nl + 1);
      }
      if (buf.size() > kMaxLine) break;
    }
    if (open && !sock.recv_some(buf)) break;
  }

  service_.unsubscribe(sub);
  writer.join();
  ::shutdown(fd, SHUT_RDWR);
}

void Server::serve_static(int fd, const std::string& method, const std::string& target) {
  Socket sock(fd);
  const bool head = method == "HEAD";
  if (method != "GET" && !head) {
    sock.send_all(http_response(405, "Method Not Allowed", "text/plain", "method not allowed\n", true));
    return;
  }
  auto not_found = [&] {
    sock.send_all(http_response(404, "Not Found", "text/plain", "not found\n", !head));
  };
  if (!options_.static_dir) return not_found();
  std::string path = target.substr(0, target.find_first_of("?#"));
  if (path.empty() || path.front() != '/') return not_found();
  if (path.back() == '/') path += "index.html";
  const std::filesystem::path rel = std::filesystem::path(path.substr(1)).lexically_normal();
  for (const auto& part : rel)
    if (part == "..") return not_found();
  const auto file = *options_.static_dir / rel;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(file, ec)) return not_found();
  std::ifstream in(file, std::ios::binary);
  std::ostringstream body;
  body << in.rdbuf();
  sock.send_all(http_response(200, "OK", content_type(file), body.str(), !head));
}

}  // namespace ifind::sim
