#pragma once

#include <cstdint>
#include <string>

#include "raptar/errors.hpp"

namespace raptar {

/// Line-oriented instrument session: ASCII commands terminated by '\n'.
/// Queries (ending in '?') produce exactly one response line.
class LineSession {
 public:
  virtual ~LineSession() = default;
  virtual void send_line(const std::string& line) = 0;
  virtual std::string query_line(const std::string& line) = 0;
};

/// Blocking TCP client session. Throws ConnectionLostError when the peer
/// vanishes and ProtocolError on malformed framing.
class TcpLineSession final : public LineSession {
 public:
  TcpLineSession(const std::string& host, std::uint16_t port,
                 double timeout_s = 10.0);
  ~TcpLineSession() override;

  TcpLineSession(const TcpLineSession&) = delete;
  TcpLineSession& operator=(const TcpLineSession&) = delete;

  void send_line(const std::string& line) override;
  std::string query_line(const std::string& line) override;

 private:
  std::string read_line();

  int fd_ = -1;
  std::string buffer_;
};

}  // namespace raptar
