#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hec/data/window.hpp"
#include "hec/types.hpp"

namespace hec::wire {

// Frame layout: 4-byte magic "HEC1", 1-byte message type, 4-byte big-endian
// payload length, payload bytes. Payloads are JSON (schemas in the README).
enum class MsgType : std::uint8_t {
  hello = 1,
  detect_req = 2,
  detect_resp = 3,
  error = 4,
  ping = 5,
};

inline constexpr char kMagic[4] = {'H', 'E', 'C', '1'};
inline constexpr std::size_t kHeaderSize = 9;
inline constexpr std::uint32_t kMaxPayload = 16u * 1024 * 1024;

struct WireMessage {
  MsgType type = MsgType::ping;
  std::string payload;

  bool operator==(const WireMessage&) const = default;
};

std::string encode_frame(const WireMessage& message);

// Consumes one complete frame from the front of the buffer, or returns
// nullopt when more bytes are needed. Bad magic, an unknown type, or an
// oversize length throw ProtocolError.
std::optional<WireMessage> try_decode_frame(std::string& buffer);

// Payload codecs. The detect request carries the window id and its row-major
// values; labels never cross the wire.
std::string encode_detect_request(const data::Window& window);
data::Window decode_detect_request(std::string_view payload);

struct WireVerdict {
  long window_id = 0;
  bool anomaly = false;
  bool confident = false;
  Layer layer = Layer::iot;
  double min_logpd = 0.0;
  double anomalous_fraction = 0.0;
  std::optional<std::string> error;
};

std::string encode_detect_response(const WireVerdict& verdict);
WireVerdict decode_detect_response(std::string_view payload);

std::string encode_hello(double link_delay_ms);
double decode_hello(std::string_view payload);

std::string encode_error(std::string_view message);

}  // namespace hec::wire
