#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rcslab::net {

/// Blocking line-oriented TCP stream. read_line strips the trailing newline;
/// it returns nullopt on orderly shutdown and throws on timeout or transport
/// failure (as protocol_error from the protocol layer's wrapper).
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream();

  void set_receive_timeout(double seconds);
  std::optional<std::string> read_line();
  void write_line(std::string_view line);
  void close();
  bool valid() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
  std::string buffer_;
};

class TcpListener {
 public:
  /// Binds and listens on the port (0 picks a free one).
  static TcpListener bind(const std::string& host, std::uint16_t port);

  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener();

  std::uint16_t port() const { return port_; }
  TcpStream accept();
  void close();

 private:
  TcpListener(int fd, std::uint16_t port) : fd_(fd), port_(port) {}
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

TcpStream connect(const std::string& host, std::uint16_t port,
                  double timeout_seconds);

/// Splits "host:port"; throws std::invalid_argument on malformed input.
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);

}  // namespace rcslab::net
