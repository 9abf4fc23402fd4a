#include "omic/ledger/socket_transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "omic/error.hpp"

namespace omic::ledger {

crypto::Bytes encode_frame(const nlohmann::json& j) {
  const auto body = j.dump();
  if (body.size() > kMaxFrame) throw Error("frame-too-large", "frame exceeds limit");
  const auto n = static_cast<std::uint32_t>(body.size());
  crypto::Bytes out{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                    static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::optional<nlohmann::json> decode_frame(crypto::Bytes& buffer) {
  if (buffer.size() < 4) return std::nullopt;
  const std::uint32_t n = (std::uint32_t{buffer[0]} << 24) | (std::uint32_t{buffer[1]} << 16) |
                          (std::uint32_t{buffer[2]} << 8) | std::uint32_t{buffer[3]};
  if (n > kMaxFrame) throw Error("frame-too-large", "peer sent oversized frame");
  if (buffer.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string body(buffer.begin() + 4, buffer.begin() + 4 + n);
  buffer.erase(buffer.begin(), buffer.begin() + 4 + n);
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed", std::string("frame: ") + e.what());
  }
}

FrameSocket& FrameSocket::operator=(FrameSocket&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = o.fd_;
    pending_ = std::move(o.pending_);
    o.fd_ = -1;
  }
  return *this;
}

FrameSocket::~FrameSocket() {
  if (fd_ >= 0) ::close(fd_);
}

FrameSocket FrameSocket::connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) {
    throw Error("io", "cannot resolve " + host);
  }
  int fd = -1;
  for (auto* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error("io", "cannot connect to " + host + ":" + std::to_string(port));
  return FrameSocket(fd);
}

void FrameSocket::send(const nlohmann::json& j) {
  const auto frame = encode_frame(j);
  std::size_t off = 0;
  while (off < frame.size()) {
    const auto n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
    if (n <= 0) throw Error("io", "send failed");
    off += static_cast<std::size_t>(n);
  }
}

std::optional<nlohmann::json> FrameSocket::receive() {
  std::uint8_t buf[4096];
  for (;;) {
    if (auto j = decode_frame(pending_)) return j;
    const auto n = ::recv(fd_, buf, sizeof buf, 0);
    if (n == 0) return std::nullopt;
    if (n < 0) throw Error("io", "recv failed");
    pending_.insert(pending_.end(), buf, buf + n);
  }
}

void FrameSocket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

FrameListener::FrameListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error("io", "socket failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw Error("io", "bad listen address " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 16) != 0) {
    ::close(fd_);
    throw Error("io", "cannot listen on " + host + ":" + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

FrameListener::~FrameListener() {
  if (fd_ >= 0) ::close(fd_);
}

FrameSocket FrameListener::accept() {
  const int c = ::accept(fd_, nullptr, nullptr);
  if (c < 0) throw Error("io", "accept failed");
  return FrameSocket(c);
}

void FrameListener::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

}  // namespace omic::ledger
