#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "opboost/wire.hpp"

namespace opboost {

// Ordered reliable byte stream; the protocol never needs more than this.
class ByteChannel {
 public:
  virtual ~ByteChannel() = default;
  virtual void send_bytes(const std::uint8_t* data, std::size_t n) = 0;
  virtual void recv_exact(std::uint8_t* out, std::size_t n) = 0;  // throws on EOF/timeout
};

// frame helpers over any channel
void send_frame(ByteChannel& ch, const Frame& frame);
Frame recv_frame(ByteChannel& ch);

// In-process pair of connected endpoints backed by byte queues. Unbounded
// sends, so a single thread can run both parties as long as every recv is
// preceded by the matching send; blocked recvs time out instead of hanging.
std::pair<std::unique_ptr<ByteChannel>, std::unique_ptr<ByteChannel>> make_loopback(
    double recv_timeout_seconds = 30.0);

class TcpChannel : public ByteChannel {
 public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  static std::unique_ptr<TcpChannel> connect(const std::string& host, std::uint16_t port,
                                             double retry_seconds = 10.0);

  void send_bytes(const std::uint8_t* data, std::size_t n) override;
  void recv_exact(std::uint8_t* out, std::size_t n) override;

 private:
  int fd_;
};

class TcpListener {
 public:
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::unique_ptr<TcpChannel> accept_one();
  std::uint16_t port() const { return port_; }  // useful when bound to port 0

 private:
  int fd_;
  std::uint16_t port_;
};

}  // namespace opboost
