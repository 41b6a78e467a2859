#include "opboost/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "opboost/errors.hpp"

namespace opboost {

void send_frame(ByteChannel& ch, const Frame& frame) {
  std::vector<std::uint8_t> bytes = encode_frame(frame);
  ch.send_bytes(bytes.data(), bytes.size());
}

Frame recv_frame(ByteChannel& ch) {
  std::uint8_t header[kFrameHeaderBytes];
  ch.recv_exact(header, sizeof(header));
  if (std::memcmp(header, "OPB1", 4) != 0) throw ProtocolError("transport: bad magic");
  std::uint8_t type = header[4];
  if (type < 1 || type > 3) throw ProtocolError("transport: unknown message type");
  std::uint32_t len = static_cast<std::uint32_t>(header[5]) |
                      (static_cast<std::uint32_t>(header[6]) << 8) |
                      (static_cast<std::uint32_t>(header[7]) << 16) |
                      (static_cast<std::uint32_t>(header[8]) << 24);
  Frame frame;
  frame.type = static_cast<MsgType>(type);
  frame.payload.resize(len);
  if (len > 0) ch.recv_exact(frame.payload.data(), len);
  return frame;
}

namespace {

struct LoopbackQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> buf;
};

class LoopbackChannel : public ByteChannel {
 public:
  LoopbackChannel(std::shared_ptr<LoopbackQueue> in, std::shared_ptr<LoopbackQueue> out,
                  double timeout_seconds)
      : in_(std::move(in)), out_(std::move(out)), timeout_(timeout_seconds) {}

  void send_bytes(const std::uint8_t* data, std::size_t n) override {
    std::lock_guard<std::mutex> lock(out_->mu);
    out_->buf.insert(out_->buf.end(), data, data + n);
    out_->cv.notify_all();
  }

  void recv_exact(std::uint8_t* out, std::size_t n) override {
    std::unique_lock<std::mutex> lock(in_->mu);
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(timeout_));
    while (in_->buf.size() < n) {
      if (in_->cv.wait_until(lock, deadline) == std::cv_status::timeout &&
          in_->buf.size() < n)
        throw ProtocolError("loopback: timed out waiting for peer data");
    }
    std::copy_n(in_->buf.begin(), n, out);
    in_->buf.erase(in_->buf.begin(), in_->buf.begin() + static_cast<std::ptrdiff_t>(n));
  }

 private:
  std::shared_ptr<LoopbackQueue> in_;
  std::shared_ptr<LoopbackQueue> out_;
  double timeout_;
};

}  // namespace

std::pair<std::unique_ptr<ByteChannel>, std::unique_ptr<ByteChannel>> make_loopback(
    double recv_timeout_seconds) {
  auto ab = std::make_shared<LoopbackQueue>();
  auto ba = std::make_shared<LoopbackQueue>();
  return {std::make_unique<LoopbackChannel>(ba, ab, recv_timeout_seconds),
          std::make_unique<LoopbackChannel>(ab, ba, recv_timeout_seconds)};
}

TcpChannel::TcpChannel(int fd) : fd_(fd) {
  if (fd_ < 0) throw ProtocolError("tcp: invalid socket");
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpChannel::connect(const std::string& host, std::uint16_t port,
                                                double retry_seconds) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  std::string service = std::to_string(port);
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(retry_seconds));
  for (;;) {
    addrinfo* res = nullptr;
    int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
    if (rc != 0) throw ProtocolError(std::string("tcp: resolve failed: ") + gai_strerror(rc));
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd);
    // the peer may simply not be listening yet
    if (std::chrono::steady_clock::now() >= deadline)
      throw ProtocolError("tcp: connect failed: " + host + ":" + service);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

void TcpChannel::send_bytes(const std::uint8_t* data, std::size_t n) {
  std::size_t sent = 0;
  while (sent < n) {
    ssize_t rc = ::send(fd_, data + sent, n - sent, 0);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("tcp: send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(rc);
  }
}

void TcpChannel::recv_exact(std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t rc = ::recv(fd_, out + got, n - got, 0);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("tcp: recv failed: ") + std::strerror(errno));
    }
    if (rc == 0) throw ProtocolError("tcp: connection closed mid-message");
    got += static_cast<std::size_t>(rc);
  }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) : fd_(-1), port_(port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  std::string service = std::to_string(port);
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res);
  if (rc != 0) throw ProtocolError(std::string("tcp: resolve failed: ") + gai_strerror(rc));
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd_ < 0) continue;
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd_, 8) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw ProtocolError("tcp: bind/listen failed on port " + service);
  if (port == 0) {
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
      if (addr.ss_family == AF_INET)
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
      else if (addr.ss_family == AF_INET6)
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
    }
  }
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpListener::accept_one() {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd);
    if (errno == EINTR) continue;
    throw ProtocolError(std::string("tcp: accept failed: ") + std::strerror(errno));
  }
}

}  // namespace opboost
