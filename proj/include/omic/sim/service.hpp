#pragma once

#include <mutex>

#include "omic/sim/world.hpp"

namespace httplib {
class Server;
}

namespace omic::sim {

// HTTP front ends over a World. Every handler takes the shared mutex, so
// requests run one at a time against the single-threaded actors.

class OwnerService {
 public:
  OwnerService(World& world, std::string owner, std::mutex& mu);
  void mount(httplib::Server& server);

  // Seals the owner's wallet to `path` under `passphrase`.
  void flush(const std::filesystem::path& path, std::string_view passphrase);

 private:
  json credentials_json() const;

  World& world_;
  std::string owner_;
  std::mutex& mu_;
  struct Backup {
    exchange::RecoveryConfig config;
    crypto::Bytes sealed;
  };
  std::optional<Backup> backup_;
};

class BoardService {
 public:
  BoardService(World& world, std::mutex& mu) : world_(world), mu_(mu) {}
  void mount(httplib::Server& server);

 private:
  World& world_;
  std::mutex& mu_;
  std::map<std::string, credentials::PresentationRequest> challenges_;  // by nonce hex
};

// Maps error codes to HTTP statuses.
int http_status_for(const std::string& code);

}  // namespace omic::sim
