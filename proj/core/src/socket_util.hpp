#pragma once

// Internal POSIX socket helpers for the wire module. Not installed.

#include <chrono>
#include <cstdint>
#include <string>

namespace hec::wire {

// All throw ProtocolError on failure.
int tcp_connect(const std::string& host, std::uint16_t port);
int tcp_listen(const std::string& host, std::uint16_t port, std::uint16_t* bound_port);
void send_all(int fd, const std::string& bytes);
// Appends whatever is available; returns false on orderly EOF.
bool recv_some(int fd, std::string& buffer);
void set_recv_timeout(int fd, std::chrono::milliseconds timeout);
void close_fd(int fd);
void shutdown_fd(int fd);
void sleep_ms(double ms);

}  // namespace hec::wire
