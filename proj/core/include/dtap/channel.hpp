#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace dtap {

class ChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChannelClosed : public ChannelError {
 public:
  ChannelClosed() : ChannelError("peer closed the connection") {}
};

/// Newline-delimited messages over a connected stream socket. Owns the fd.
class LineChannel {
 public:
  LineChannel() = default;
  explicit LineChannel(int fd);
  ~LineChannel();
  LineChannel(LineChannel&& other) noexcept;
  LineChannel& operator=(LineChannel&& other) noexcept;
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  bool is_open() const { return fd_ >= 0; }
  void close();

  /// Writes `line` followed by '\n'. `line` must not contain newlines.
  void send_line(std::string_view line);

  /// Next line without its terminator, or nullopt if none arrived in time.
  /// Throws ChannelClosed at end of stream.
  std::optional<std::string> receive_line(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::string buffer_;
};

inline constexpr std::size_t kMaxLineBytes = 64u << 20;

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses "host:port".
Endpoint parse_endpoint(std::string_view text);

LineChannel connect_tcp(const Endpoint& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(10));

class TcpListener {
 public:
  /// Port 0 binds an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& bind_address = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  /// Waits for one connection; nullopt on timeout.
  std::optional<LineChannel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Two connected in-process channel ends.
std::pair<LineChannel, LineChannel> make_channel_pair();

}  // namespace dtap
