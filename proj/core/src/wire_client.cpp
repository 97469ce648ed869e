#include "hec/wire/client.hpp"

#include <chrono>

#include "socket_util.hpp"

namespace hec::wire {

WireClient::WireClient(const std::string& host, std::uint16_t port, double link_delay_ms,
                       std::chrono::milliseconds timeout)
    : link_delay_ms_(link_delay_ms) {
  fd_ = tcp_connect(host, port);
  set_recv_timeout(fd_, timeout);
  const WireMessage hello = roundtrip({MsgType::hello, encode_hello(link_delay_ms_)});
  if (hello.type != MsgType::hello) {
    close_fd(fd_);
    fd_ = -1;
    throw ProtocolError("node did not answer HELLO");
  }
}

WireClient::~WireClient() { close_fd(fd_); }

WireMessage WireClient::roundtrip(const WireMessage& request) {
  sleep_ms(link_delay_ms_);
  send_all(fd_, encode_frame(request));
  while (true) {
    if (auto msg = try_decode_frame(buffer_)) {
      if (msg->type == MsgType::error) {
        throw ProtocolError("node error: " + msg->payload);
      }
      return *msg;
    }
    if (!recv_some(fd_, buffer_)) throw ProtocolError("node closed the connection");
  }
}

WireDetection WireClient::detect(const data::Window& window) {
  const auto start = std::chrono::steady_clock::now();
  const WireMessage resp = roundtrip({MsgType::detect_req, encode_detect_request(window)});
  if (resp.type != MsgType::detect_resp) throw ProtocolError("unexpected reply to detect");
  WireDetection out;
  out.verdict = decode_detect_response(resp.payload);
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  return out;
}

void WireClient::ping() {
  const WireMessage resp = roundtrip({MsgType::ping, {}});
  if (resp.type != MsgType::ping) throw ProtocolError("unexpected reply to ping");
}

WireDetection client_detect(const std::string& host, std::uint16_t port,
                            const data::Window& window, double link_delay_ms,
                            std::chrono::milliseconds timeout) {
  WireClient client(host, port, link_delay_ms, timeout);
  return client.detect(window);
}

}  // namespace hec::wire
