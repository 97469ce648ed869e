#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "hec/data/window.hpp"
#include "hec/wire/frame.hpp"

namespace hec::wire {

struct WireDetection {
  WireVerdict verdict;
  double wall_ms = 0.0;  // measured request round trip
};

// Keep-alive client connection to a node. The declared link delay is echoed
// in HELLO so both endpoints emulate the same one-way latency before sends.
class WireClient {
 public:
  WireClient(const std::string& host, std::uint16_t port, double link_delay_ms = 0.0,
             std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));
  ~WireClient();

  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  WireDetection detect(const data::Window& window);
  void ping();

 private:
  WireMessage roundtrip(const WireMessage& request);

  int fd_ = -1;
  double link_delay_ms_ = 0.0;
  std::string buffer_;
};

// One-shot convenience wrapper: connect, detect, disconnect.
WireDetection client_detect(const std::string& host, std::uint16_t port,
                            const data::Window& window, double link_delay_ms = 0.0,
                            std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));

}  // namespace hec::wire
