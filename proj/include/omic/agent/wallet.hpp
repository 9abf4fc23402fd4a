#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "omic/agent/did.hpp"

namespace omic::agent {

using json = nlohmann::json;

struct Invitation {
  std::string id;
  std::string label;
  crypto::KeyPair key;  // one-time recipient key
  bool multi_use = false;
  int uses = 0;
};

struct Connection {
  std::string id;
  std::string my_did;
  crypto::KeyPair my_key;
  std::string their_did;
  crypto::VerificationKey their_vk;
  std::string label;  // how the counterparty introduced itself
  std::int64_t established_at = 0;
  std::string state;  // "requested" | "complete" | "aborted"
  std::string invitation_id;
  crypto::VerificationKey invitation_key;  // invitee side: key to confirm against
  std::string request_nonce;
};

// Everything an agent persists. Credential, consent and reward records are
// opaque JSON owned by the protocol layers.
struct WalletStore {
  std::string label;
  std::optional<Did> public_did;
  std::map<std::string, Invitation> invitations;
  std::map<std::string, Connection> connections;
  json credentials = json::object();
  json records = json::object();
  json recovery = json::object();
  std::set<std::string> seen_message_ids;
  std::set<std::string> seen_request_nonces;
  std::set<std::string> accepted_invitations;  // invitee side
  std::int64_t clock = 0;

  json to_json() const;
  static WalletStore from_json(const json& j);
  bool operator==(const WalletStore& o) const { return to_json() == o.to_json(); }
};

inline constexpr std::string_view kWalletMagic = "OMICWALLET1";
inline constexpr std::size_t kWalletSaltBytes = 16;

// argon2id(passphrase, salt) -> 32-byte secretbox key.
std::array<std::uint8_t, 32> derive_wallet_key(std::string_view passphrase, crypto::ByteView salt);

// File layout: magic || salt(16) || nonce(24) || secretbox(canonical JSON).
crypto::Bytes wallet_save(const WalletStore& wallet, std::string_view passphrase, crypto::Drbg& rng);
crypto::Bytes wallet_save_with_key(const WalletStore& wallet, const std::array<std::uint8_t, 32>& key,
                                   crypto::ByteView salt, crypto::Drbg& rng);
// Throws omic::Error("bad-wallet") for a wrong header or truncation and
// ("auth-failed") for a wrong passphrase or modified ciphertext.
WalletStore wallet_load(crypto::ByteView sealed, std::string_view passphrase);
WalletStore wallet_load_with_key(crypto::ByteView sealed, const std::array<std::uint8_t, 32>& key);
crypto::Bytes wallet_salt(crypto::ByteView sealed);

}  // namespace omic::agent
