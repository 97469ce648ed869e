#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hec/detectors/detector.hpp"
#include "hec/wire/frame.hpp"

namespace hec::wire {

struct NodeConfig {
  Layer role = Layer::iot;
  std::string listen_host = "127.0.0.1";
  std::uint16_t listen_port = 0;  // 0 picks an ephemeral port
  std::optional<std::string> upstream_host;
  std::optional<std::uint16_t> upstream_port;
  double link_delay_ms = 0.0;  // one-way delay of this node's upstream link
  std::filesystem::path bundle_path;

  void validate() const;  // device and edge need an upstream, cloud must not have one
};

// One tier of the hierarchy behind a keep-alive TCP socket. Handles each
// downstream connection on its own thread; requests on a connection are
// answered in order. A request is answered locally when the verdict is
// confident or this is the cloud; otherwise it is forwarded over a single
// per-client upstream connection and the response is relayed back.
class Node {
 public:
  Node(NodeConfig config, detectors::DetectorArtifact artifact);
  explicit Node(NodeConfig config);  // loads the artifact from bundle_path
  ~Node();

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  void start();
  void stop();
  std::uint16_t port() const { return port_; }

  // Observability for tests and logs.
  long upstream_connections_opened() const { return upstream_connects_.load(); }
  long upstream_requests_sent() const { return upstream_requests_.load(); }
  long requests_served() const { return requests_.load(); }

 private:
  void accept_loop();
  void handle_connection(int fd);

  NodeConfig config_;
  detectors::DetectorArtifact artifact_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex conn_mutex_;
  std::vector<int> conn_fds_;
  std::vector<std::thread> conn_threads_;
  std::atomic<long> upstream_connects_{0};
  std::atomic<long> upstream_requests_{0};
  std::atomic<long> requests_{0};
};

}  // namespace hec::wire
