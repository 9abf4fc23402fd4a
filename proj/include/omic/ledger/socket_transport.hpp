#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "omic/crypto/bytes.hpp"

namespace omic::ledger {

// Frames are a 4-byte big-endian length followed by that many bytes of
// UTF-8 JSON. Frames above kMaxFrame are refused.
inline constexpr std::uint32_t kMaxFrame = 16u << 20;

crypto::Bytes encode_frame(const nlohmann::json& j);
// Consumes one complete frame from the front of `buffer`, if present.
std::optional<nlohmann::json> decode_frame(crypto::Bytes& buffer);

class FrameSocket {
 public:
  explicit FrameSocket(int fd) : fd_(fd) {}
  FrameSocket(FrameSocket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  FrameSocket& operator=(FrameSocket&& o) noexcept;
  FrameSocket(const FrameSocket&) = delete;
  FrameSocket& operator=(const FrameSocket&) = delete;
  ~FrameSocket();

  static FrameSocket connect(const std::string& host, std::uint16_t port);

  void send(const nlohmann::json& j);
  // nullopt on orderly close.
  std::optional<nlohmann::json> receive();
  bool valid() const { return fd_ >= 0; }
  // Wakes a blocked receive(), which then returns nullopt or throws.
  void shutdown();

 private:
  int fd_;
  crypto::Bytes pending_;
};

class FrameListener {
 public:
  // Port 0 picks a free port; see port().
  FrameListener(const std::string& host, std::uint16_t port);
  ~FrameListener();
  FrameListener(const FrameListener&) = delete;
  FrameListener& operator=(const FrameListener&) = delete;

  std::uint16_t port() const { return port_; }
  FrameSocket accept();
  // Wakes a blocked accept(), which then throws.
  void shutdown();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace omic::ledger
