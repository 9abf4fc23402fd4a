#include "omic/exchange/recovery.hpp"

#include "omic/error.hpp"

namespace omic::exchange {

using agent::Agent;
using agent::Connection;
using agent::Effects;
using agent::Message;

json share_to_json(const crypto::SecretShare& s) {
  return {{"index", s.index}, {"threshold", s.threshold}, {"payload", crypto::to_hex(s.payload)},
          {"checksum", s.checksum.hex()}};
}

crypto::SecretShare share_from_json(const json& j) {
  try {
    return {j.at("index").get<int>(), j.at("threshold").get<int>(),
            crypto::from_hex(j.at("payload").get<std::string>()),
            crypto::Digest32::from_hex(j.at("checksum").get<std::string>())};
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("share: ") + e.what());
  }
}

json RecoveryConfig::to_json() const { return {{"owner_ref", owner_ref}, {"guardians", guardians}, {"k", k}}; }

RecoveryConfig configure_recovery(Agent& owner, const std::vector<std::string>& guardian_connections, int k,
                                  const std::array<std::uint8_t, 32>& wallet_key, Effects& fx) {
  const int n = static_cast<int>(guardian_connections.size());
  if (k < 1 || k > n) throw Error("bad-parameters", "threshold must be between 1 and the number of guardians");
  for (const auto& c : guardian_connections) owner.connection(c);
  RecoveryConfig cfg{crypto::to_hex(owner.rng().bytes(16)), guardian_connections, k};
  const auto shares = crypto::share_split({wallet_key.data(), wallet_key.size()}, k, n, owner.rng());
  const auto thread = agent::new_thread_id(owner.rng());
  for (int i = 0; i < n; ++i) {
    owner.send(guardian_connections[i],
               agent::make_message(std::string(kRecoveryProtocol), "share-deposit", thread,
                                   {{"owner_ref", cfg.owner_ref}, {"share", share_to_json(shares[i])}}, owner.rng()),
               fx);
  }
  owner.wallet().recovery = cfg.to_json();
  return cfg;
}

Guardian::Guardian(Agent& agent) : agent_(agent) {
  agent_.on(
      std::string(kRecoveryProtocol),
      [](Agent& self, const Connection& conn, const Message& msg, Effects&) {
        if (msg.type == agent::kProblemReport) return;
        if (msg.type != "share-deposit") throw Error("unexpected-message", "guardian does not handle " + msg.type);
        const auto ref = msg.body.at("owner_ref").get<std::string>();
        share_from_json(msg.body.at("share"));
        self.wallet().records["guardian_shares"][ref] = {{"share", msg.body.at("share")}, {"connection_id", conn.id}};
      },
      {"share-deposit"});
}

std::optional<crypto::SecretShare> Guardian::release(const std::string& owner_ref) const {
  const auto& rec = agent_.wallet().records;
  if (!rec.contains("guardian_shares") || !rec["guardian_shares"].contains(owner_ref)) return std::nullopt;
  return share_from_json(rec["guardian_shares"][owner_ref]["share"]);
}

std::size_t Guardian::held() const {
  const auto& rec = agent_.wallet().records;
  return rec.contains("guardian_shares") ? rec["guardian_shares"].size() : 0;
}

agent::WalletStore recover_wallet(std::span<const crypto::SecretShare> shares, crypto::ByteView sealed) {
  const auto secret = crypto::share_combine(shares);
  if (secret.size() != 32) throw Error("checksum-mismatch", "recovered key has the wrong length");
  std::array<std::uint8_t, 32> key{};
  std::copy(secret.begin(), secret.end(), key.begin());
  return agent::wallet_load_with_key(sealed, key);
}

}  // namespace omic::exchange
