#include "hec/wire/node.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "socket_util.hpp"

namespace hec::wire {

void sleep_ms(double ms) {
  if (ms > 0.0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

int tcp_connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res) {
    throw ProtocolError("cannot resolve " + host);
  }
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    freeaddrinfo(res);
    throw ProtocolError("socket: " + std::string(std::strerror(errno)));
  }
  if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    const std::string err = std::strerror(errno);
    freeaddrinfo(res);
    ::close(fd);
    throw ProtocolError("connect to " + host + ":" + service + ": " + err);
  }
  freeaddrinfo(res);
  const int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

int tcp_listen(const std::string& host, std::uint16_t port, std::uint16_t* bound_port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ProtocolError("socket: " + std::string(std::strerror(errno)));
  const int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw ProtocolError("bad listen address " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw ProtocolError("bind " + host + ":" + std::to_string(port) + ": " + err);
  }
  if (::listen(fd, 16) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw ProtocolError("listen: " + err);
  }
  if (bound_port) {
    sockaddr_in actual{};
    socklen_t len = sizeof(actual);
    getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len);
    *bound_port = ntohs(actual.sin_port);
  }
  return fd;
}

void send_all(int fd, const std::string& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      throw ProtocolError("send: " + std::string(std::strerror(errno)));
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool recv_some(int fd, std::string& buffer) {
  char chunk[16384];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n > 0) {
      buffer.append(chunk, static_cast<std::size_t>(n));
      return true;
    }
    if (n == 0) return false;
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) {
      throw ProtocolError("receive timed out");
    }
    throw ProtocolError("recv: " + std::string(std::strerror(errno)));
  }
}

void set_recv_timeout(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void close_fd(int fd) {
  if (fd >= 0) ::close(fd);
}

void shutdown_fd(int fd) {
  if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

void NodeConfig::validate() const {
  const bool has_upstream = upstream_host.has_value() && upstream_port.has_value();
  if (role == Layer::cloud && has_upstream) {
    throw ConfigError("the cloud node has no upstream");
  }
  if (role != Layer::cloud && !has_upstream) {
    throw ConfigError(std::string(to_string(role)) + " node needs an upstream address");
  }
  if (link_delay_ms < 0.0) throw ConfigError("link delay must be >= 0");
}

Node::Node(NodeConfig config, detectors::DetectorArtifact artifact)
    : config_(std::move(config)), artifact_(std::move(artifact)) {
  config_.validate();
  if (artifact_.spec.layer != config_.role) {
    throw ArtifactError("bundle is for layer " + std::string(to_string(artifact_.spec.layer)) +
                        ", node role is " + std::string(to_string(config_.role)));
  }
}

Node::Node(NodeConfig config) : Node(config, detectors::load_bundle(config.bundle_path)) {}

Node::~Node() { stop(); }

void Node::start() {
  if (running_.exchange(true)) return;
  listen_fd_ = tcp_listen(config_.listen_host, config_.listen_port, &port_);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void Node::stop() {
  if (!running_.exchange(false)) return;
  shutdown_fd(listen_fd_);
  close_fd(listen_fd_);
  listen_fd_ = -1;
  {
    std::lock_guard lock(conn_mutex_);
    for (int fd : conn_fds_) shutdown_fd(fd);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(conn_mutex_);
    threads.swap(conn_threads_);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
  std::lock_guard lock(conn_mutex_);
  for (int fd : conn_fds_) close_fd(fd);
  conn_fds_.clear();
}

void Node::accept_loop() {
  while (running_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 100);
    if (!running_.load()) break;
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(conn_mutex_);
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

namespace {

// Per-downstream-connection upstream link: opened lazily, reused for every
// forwarded request (keep-alive), torn down with the connection.
class UpstreamLink {
 public:
  UpstreamLink(const NodeConfig& config, std::atomic<long>& connect_counter)
      : config_(config), connects_(connect_counter) {}
  ~UpstreamLink() { close_fd(fd_); }

  WireMessage forward(const WireMessage& request) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        ensure_connected();
        sleep_ms(config_.link_delay_ms);
        send_all(fd_, encode_frame(request));
        while (true) {
          if (auto msg = try_decode_frame(buffer_)) return *msg;
          if (!recv_some(fd_, buffer_)) throw ProtocolError("upstream closed the connection");
        }
      } catch (const ProtocolError&) {
        close_fd(fd_);
        fd_ = -1;
        buffer_.clear();
        if (attempt == 1) throw;  // one retry, then report
      }
    }
    throw ProtocolError("unreachable");
  }

 private:
  void ensure_connected() {
    if (fd_ >= 0) return;
    fd_ = tcp_connect(*config_.upstream_host, *config_.upstream_port);
    set_recv_timeout(fd_, std::chrono::milliseconds(10000));
    ++connects_;
    sleep_ms(config_.link_delay_ms);
    send_all(fd_, encode_frame({MsgType::hello, encode_hello(config_.link_delay_ms)}));
    while (true) {
      if (auto msg = try_decode_frame(buffer_)) {
        if (msg->type != MsgType::hello) throw ProtocolError("expected HELLO from upstream");
        return;
      }
      if (!recv_some(fd_, buffer_)) throw ProtocolError("upstream closed during HELLO");
    }
  }

  const NodeConfig& config_;
  std::atomic<long>& connects_;
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace

void Node::handle_connection(int fd) {
  std::string buffer;
  double client_delay = 0.0;
  UpstreamLink upstream(config_, upstream_connects_);

  auto reply = [&](const WireMessage& msg) {
    sleep_ms(client_delay);
    send_all(fd, encode_frame(msg));
  };

  try {
    while (running_.load()) {
      std::optional<WireMessage> msg;
      try {
        msg = try_decode_frame(buffer);
      } catch (const ProtocolError& e) {
        // Malformed frame: report and reset the connection.
        try {
          reply({MsgType::error, encode_error(e.what())});
        } catch (const ProtocolError&) {
        }
        break;
      }
      if (!msg) {
        if (!recv_some(fd, buffer)) break;  // client hung up
        continue;
      }
      switch (msg->type) {
        case MsgType::hello:
          client_delay = decode_hello(msg->payload);
          reply({MsgType::hello, encode_hello(client_delay)});
          break;
        case MsgType::ping:
          reply({MsgType::ping, {}});
          break;
        case MsgType::detect_req: {
          ++requests_;
          WireVerdict own;
          try {
            const data::Window window = decode_detect_request(msg->payload);
            const detectors::Detection det = detectors::detect(
                artifact_.params, artifact_.spec, artifact_.error_model, window);
            own.window_id = window.id;
            own.anomaly = det.is_anomaly;
            own.confident = det.confident;
            own.layer = config_.role;
            own.min_logpd = det.min_logpd;
            own.anomalous_fraction = det.anomalous_point_fraction;
          } catch (const Error& e) {
            reply({MsgType::error, encode_error(e.what())});
            break;
          }
          if (own.confident || config_.role == Layer::cloud) {
            reply({MsgType::detect_resp, encode_detect_response(own)});
            break;
          }
          try {
            ++upstream_requests_;
            const WireMessage up = upstream.forward(*msg);
            if (up.type != MsgType::detect_resp) {
              throw ProtocolError("unexpected upstream reply type");
            }
            reply(up);  // relay the upstream verdict byte for byte
          } catch (const ProtocolError& e) {
            own.error = std::string("upstream unreachable: ") + e.what();
            reply({MsgType::detect_resp, encode_detect_response(own)});
          }
          break;
        }
        case MsgType::detect_resp:
        case MsgType::error:
          // Clients should not send these; drop the connection.
          throw ProtocolError("unexpected message type from downstream");
      }
    }
  } catch (const ProtocolError&) {
    // Connection-level failure: fall through to cleanup.
  }
  shutdown_fd(fd);
}

}  // namespace hec::wire
