#pragma once

#include "omic/agent/agent.hpp"
#include "omic/crypto/secret_sharing.hpp"

namespace omic::exchange {

using json = nlohmann::json;

inline constexpr std::string_view kRecoveryProtocol = "wallet-recovery/1.0";

json share_to_json(const crypto::SecretShare& s);
crypto::SecretShare share_from_json(const json& j);

struct RecoveryConfig {
  std::string owner_ref;  // how guardians file the share
  std::vector<std::string> guardians;  // owner-side connection ids
  int k = 0;

  json to_json() const;
};

// Splits the wallet key k-of-n over the guardian connections and sends one
// share to each, authcrypt. Stores the config (never the shares) in the
// wallet. Throws omic::Error("bad-parameters") unless 1 <= k <= guardians.
RecoveryConfig configure_recovery(agent::Agent& owner, const std::vector<std::string>& guardian_connections, int k,
                                  const std::array<std::uint8_t, 32>& wallet_key, agent::Effects& fx);

// Keeps deposited shares and releases them on request.
class Guardian {
 public:
  explicit Guardian(agent::Agent& agent);
  std::optional<crypto::SecretShare> release(const std::string& owner_ref) const;
  std::size_t held() const;

 private:
  agent::Agent& agent_;
};

// Reconstructs the wallet key from the shares and opens the sealed wallet.
// Throws ("insufficient-shares"), ("checksum-mismatch") and the wallet
// loader's errors.
agent::WalletStore recover_wallet(std::span<const crypto::SecretShare> shares, crypto::ByteView sealed);

}  // namespace omic::exchange
