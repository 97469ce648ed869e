#include "hec/wire/frame.hpp"

#include <cstring>

#include "json_util.hpp"

namespace hec::wire {

namespace {

bool valid_type(std::uint8_t t) { return t >= 1 && t <= 5; }

}  // namespace

std::string encode_frame(const WireMessage& message) {
  if (message.payload.size() > kMaxPayload) throw ProtocolError("payload exceeds 16 MiB");
  std::string out;
  out.reserve(kHeaderSize + message.payload.size());
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(message.type));
  const std::uint32_t len = static_cast<std::uint32_t>(message.payload.size());
  out.push_back(static_cast<char>((len >> 24) & 0xff));
  out.push_back(static_cast<char>((len >> 16) & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out.push_back(static_cast<char>(len & 0xff));
  out.append(message.payload);
  return out;
}

std::optional<WireMessage> try_decode_frame(std::string& buffer) {
  if (buffer.size() < kHeaderSize) return std::nullopt;
  if (std::memcmp(buffer.data(), kMagic, 4) != 0) throw ProtocolError("bad frame magic");
  const std::uint8_t type = static_cast<std::uint8_t>(buffer[4]);
  if (!valid_type(type)) {
    throw ProtocolError("unknown message type " + std::to_string(type));
  }
  const std::uint32_t len = (static_cast<std::uint32_t>(static_cast<std::uint8_t>(buffer[5])) << 24) |
                            (static_cast<std::uint32_t>(static_cast<std::uint8_t>(buffer[6])) << 16) |
                            (static_cast<std::uint32_t>(static_cast<std::uint8_t>(buffer[7])) << 8) |
                            static_cast<std::uint32_t>(static_cast<std::uint8_t>(buffer[8]));
  if (len > kMaxPayload) throw ProtocolError("frame payload exceeds 16 MiB");
  if (buffer.size() < kHeaderSize + len) return std::nullopt;
  WireMessage message;
  message.type = static_cast<MsgType>(type);
  message.payload = buffer.substr(kHeaderSize, len);
  buffer.erase(0, kHeaderSize + len);
  return message;
}

namespace {

iojson::json parse_payload(std::string_view payload, const char* what) {
  try {
    return iojson::json::parse(payload);
  } catch (const iojson::json::parse_error& e) {
    throw ProtocolError(std::string("malformed ") + what + " payload: " + e.what());
  }
}

}  // namespace

std::string encode_detect_request(const data::Window& window) {
  iojson::json values = iojson::json::array();
  for (int r = 0; r < window.values.rows(); ++r) {
    for (int c = 0; c < window.values.cols(); ++c) values.push_back(window.values(r, c));
  }
  return iojson::json{{"id", window.id},
                      {"rows", window.values.rows()},
                      {"cols", window.values.cols()},
                      {"values", std::move(values)}}
      .dump();
}

data::Window decode_detect_request(std::string_view payload) {
  const iojson::json j = parse_payload(payload, "detect request");
  data::Window w;
  try {
    w.id = iojson::require(j, "id").get<long>();
    const long rows = iojson::require(j, "rows").get<long>();
    const long cols = iojson::require(j, "cols").get<long>();
    const auto& values = iojson::require(j, "values");
    if (rows < 1 || cols < 1 || static_cast<long>(values.size()) != rows * cols) {
      throw ProtocolError("detect request value count does not match rows*cols");
    }
    w.values = Mat(rows, cols);
    long i = 0;
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) w.values(r, c) = values[i++].get<double>();
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError(std::string("malformed detect request: ") + e.what());
  }
  return w;
}

std::string encode_detect_response(const WireVerdict& verdict) {
  iojson::json j{{"id", verdict.window_id},
                 {"anomaly", verdict.anomaly},
                 {"confident", verdict.confident},
                 {"layer", std::string(to_string(verdict.layer))},
                 {"min_logpd", verdict.min_logpd},
                 {"anomalous_fraction", verdict.anomalous_fraction}};
  if (verdict.error) {
    j["error"] = *verdict.error;
  } else {
    j["error"] = nullptr;
  }
  return j.dump();
}

WireVerdict decode_detect_response(std::string_view payload) {
  const iojson::json j = parse_payload(payload, "detect response");
  WireVerdict v;
  try {
    v.window_id = iojson::require(j, "id").get<long>();
    v.anomaly = iojson::require(j, "anomaly").get<bool>();
    v.confident = iojson::require(j, "confident").get<bool>();
    v.layer = layer_from_string(iojson::require(j, "layer").get<std::string>());
    v.min_logpd = iojson::require(j, "min_logpd").get<double>();
    v.anomalous_fraction = iojson::require(j, "anomalous_fraction").get<double>();
    const auto& err = iojson::require(j, "error");
    if (!err.is_null()) v.error = err.get<std::string>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError(std::string("malformed detect response: ") + e.what());
  }
  return v;
}

std::string encode_hello(double link_delay_ms) {
  return iojson::json{{"link_delay_ms", link_delay_ms}}.dump();
}

double decode_hello(std::string_view payload) {
  if (payload.empty()) return 0.0;
  const iojson::json j = parse_payload(payload, "hello");
  auto it = j.find("link_delay_ms");
  if (it == j.end()) return 0.0;
  const double delay = it->get<double>();
  if (delay < 0.0) throw ProtocolError("negative link delay");
  return delay;
}

std::string encode_error(std::string_view message) {
  return iojson::json{{"message", std::string(message)}}.dump();
}

}  // namespace hec::wire
