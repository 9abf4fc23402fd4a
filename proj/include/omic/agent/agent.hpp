#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "omic/agent/envelope.hpp"
#include "omic/agent/ledger_client.hpp"
#include "omic/agent/message.hpp"
#include "omic/agent/wallet.hpp"

namespace omic::agent {

struct Effects {
  std::vector<Envelope> out;
  std::vector<json> events;  // UI-facing notifications
  void merge(Effects&& other);
};

class Agent {
 public:
  // Handlers run inside dispatch. Throwing omic::Error turns into a
  // problem-report reply on the same thread; handlers validate before they
  // mutate so a refused message leaves state unchanged.
  using Handler = std::function<void(Agent&, const Connection&, const Message&, Effects&)>;

  Agent(std::string label, crypto::Drbg rng, LedgerClient* ledger = nullptr);

  const std::string& label() const { return wallet_.label; }
  crypto::Drbg& rng() { return rng_; }
  WalletStore& wallet() { return wallet_; }
  const WalletStore& wallet() const { return wallet_; }
  LedgerClient& ledger();
  bool has_ledger() const { return ledger_ != nullptr; }
  void set_ledger(LedgerClient* ledger) { ledger_ = ledger; }

  // Public DIDs are kept in the wallet; pairwise DIDs belong to connections.
  Did create_did(Visibility visibility);
  const Did& public_did() const;
  // Creates a public DID and registers it with a NYM transaction.
  ledger::Receipt register_public_did(const std::string& role);

  json create_invitation(const std::string& my_label, bool multi_use = false);
  // Invitee side. Returns the new connection id and the request envelope.
  // Throws omic::Error("invitation-used") or ("malformed").
  std::pair<std::string, Envelope> accept_invitation(const json& invitation, const std::string& my_label);

  // Throws omic::Error for envelopes that do not unpack (unknown-recipient,
  // wrong-recipient, auth-failed, malformed); protocol problems come back as
  // problem-report replies.
  Effects dispatch(const Envelope& envelope);
  // Several handlers may share a protocol when they split its message types;
  // an empty type set takes every type. Problem reports reach all of them.
  void on(const std::string& protocol, Handler handler, std::set<std::string> types = {});

  // Runs when a connection completes on either side, inside the dispatch that
  // completed it; anything sent through `fx` follows the handshake reply.
  using ConnectionHook = std::function<void(Agent&, const Connection&, Effects&)>;
  void on_connected(ConnectionHook hook) { connection_hooks_.push_back(std::move(hook)); }

  Envelope pack_for(const std::string& connection_id, const Message& message);
  void send(const std::string& connection_id, const Message& message, Effects& fx);

  bool owns_key(const std::string& verkey_b58) const { return key_index_.count(verkey_b58) > 0; }
  const Connection& connection(const std::string& id) const;
  std::vector<const Connection*> list_connections() const;

  // Plaintext of every message this agent received or sent, in order. The
  // received log is what a counterparty could retain and correlate.
  const std::vector<json>& received() const { return received_; }
  const std::vector<json>& sent() const { return sent_; }

  // Swaps in a recovered wallet and rebuilds key routing.
  void replace_wallet(WalletStore wallet);

 private:
  Effects handle_request(const Invitation& inv, const Message& msg);
  Effects handle_response(Connection& conn, const Unpacked& unpacked, const Message& msg);
  void index_keys();

  WalletStore wallet_;
  crypto::Drbg rng_;
  LedgerClient* ledger_;
  struct Route {
    std::set<std::string> types;
    Handler handler;
  };
  std::map<std::string, std::vector<Route>> handlers_;
  std::map<std::string, std::pair<bool, std::string>> key_index_;  // vk -> (is_invitation, id)
  std::vector<ConnectionHook> connection_hooks_;
  std::vector<json> received_;
  std::vector<json> sent_;
};

}  // namespace omic::agent
