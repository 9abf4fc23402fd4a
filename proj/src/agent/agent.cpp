#include "omic/agent/agent.hpp"

#include "omic/crypto/did.hpp"
#include "omic/error.hpp"
#include "omic/ledger/builders.hpp"

namespace omic::agent {

namespace {

std::string confirm_bytes(const std::string& did, const std::string& verkey, const std::string& nonce,
                          const std::string& invitation_id) {
  return json{{"did", did}, {"invitation_id", invitation_id}, {"nonce", nonce}, {"verkey", verkey}}.dump();
}

bool verify_b58(const std::string& verkey, const std::string& bytes, const std::string& sig_hex) {
  try {
    return crypto::verify(crypto::VerificationKey::from_base58(verkey), crypto::as_bytes(bytes),
                          crypto::Signature::from_hex(sig_hex));
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

void Effects::merge(Effects&& other) {
  for (auto& e : other.out) out.push_back(std::move(e));
  for (auto& e : other.events) events.push_back(std::move(e));
}

Agent::Agent(std::string label, crypto::Drbg rng, LedgerClient* ledger) : rng_(std::move(rng)), ledger_(ledger) {
  wallet_.label = std::move(label);
}

LedgerClient& Agent::ledger() {
  if (!ledger_) throw Error("no-ledger", "agent has no ledger client");
  return *ledger_;
}

Did Agent::create_did(Visibility visibility) {
  auto did = agent::create_did(rng_, visibility);
  if (visibility == Visibility::kPublic) wallet_.public_did = did;
  return did;
}

const Did& Agent::public_did() const {
  if (!wallet_.public_did) throw Error("no-public-did", wallet_.label + " has no public DID");
  return *wallet_.public_did;
}

ledger::Receipt Agent::register_public_did(const std::string& role) {
  auto did = create_did(Visibility::kPublic);
  return ledger().submit(ledger::make_nym(did.key, role, rng_));
}

void Agent::index_keys() {
  key_index_.clear();
  for (const auto& [id, inv] : wallet_.invitations) key_index_[inv.key.verification_key().base58()] = {true, id};
  for (const auto& [id, c] : wallet_.connections) key_index_[c.my_key.verification_key().base58()] = {false, id};
}

void Agent::replace_wallet(WalletStore wallet) {
  wallet_ = std::move(wallet);
  index_keys();
}

json Agent::create_invitation(const std::string& my_label, bool multi_use) {
  Invitation inv{new_thread_id(rng_), my_label, crypto::generate_keypair(rng_.bytes(32)), multi_use, 0};
  const auto vk = inv.key.verification_key().base58();
  key_index_[vk] = {true, inv.id};
  wallet_.invitations[inv.id] = inv;
  return {{"type", "invitation"}, {"id", inv.id}, {"label", my_label}, {"recipient_key", vk}};
}

std::pair<std::string, Envelope> Agent::accept_invitation(const json& invitation, const std::string& my_label) {
  std::string inv_id;
  crypto::VerificationKey inv_key;
  try {
    if (invitation.at("type") != "invitation") throw Error("malformed", "not an invitation");
    inv_id = invitation.at("id").get<std::string>();
    inv_key = crypto::VerificationKey::from_base58(invitation.at("recipient_key").get<std::string>());
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("invitation: ") + e.what());
  }
  if (wallet_.accepted_invitations.count(inv_id)) throw Error("invitation-used", "invitation already accepted");

  auto me = agent::create_did(rng_, Visibility::kPairwise);
  Connection c;
  c.id = new_thread_id(rng_);
  c.my_did = me.id;
  c.my_key = me.key;
  c.label = invitation.value("label", "");
  c.state = "requested";
  c.invitation_id = inv_id;
  c.invitation_key = inv_key;
  c.request_nonce = crypto::to_hex(rng_.bytes(16));
  c.established_at = ++wallet_.clock;

  const auto vk = me.key.verification_key().base58();
  const auto sig = me.key.sign(crypto::as_bytes(confirm_bytes(me.id, vk, c.request_nonce, inv_id)));
  auto msg = make_message(std::string(kConnectionsProtocol), "request", c.id,
                          {{"invitation_id", inv_id},
                           {"label", my_label},
                           {"did", me.id},
                           {"verkey", vk},
                           {"nonce", c.request_nonce},
                           {"signature", sig.hex()}},
                          rng_);
  wallet_.accepted_invitations.insert(inv_id);
  wallet_.connections[c.id] = c;
  key_index_[vk] = {false, c.id};
  sent_.push_back({{"connection_id", c.id}, {"message", msg.to_json()}});
  return {c.id, pack_anoncrypt(inv_key, crypto::as_bytes(msg.canonical()), rng_)};
}

Effects Agent::handle_request(const Invitation& inv_ref, const Message& msg) {
  Effects fx;
  const auto& b = msg.body;
  auto refuse = [&](const std::string& code, const std::string& why) {
    fx.events.push_back({{"type", "connection-refused"}, {"code", code}, {"detail", why}});
    try {
      auto vk = crypto::VerificationKey::from_base58(b.at("verkey").get<std::string>());
      auto report = make_problem_report(msg, code, why, rng_);
      fx.out.push_back(pack_anoncrypt(vk, crypto::as_bytes(report.canonical()), rng_));
    } catch (const std::exception&) {
      // no usable return key
    }
    return fx;
  };
  if (msg.protocol != kConnectionsProtocol || msg.type != "request") {
    return refuse("unexpected-message", "invitation keys only accept connection requests");
  }
  std::string did, verkey, nonce, label, sig;
  try {
    did = b.at("did").get<std::string>();
    verkey = b.at("verkey").get<std::string>();
    nonce = b.at("nonce").get<std::string>();
    label = b.at("label").get<std::string>();
    sig = b.at("signature").get<std::string>();
    if (b.at("invitation_id") != inv_ref.id) return refuse("malformed", "request names another invitation");
  } catch (const json::exception&) {
    return refuse("malformed", "request fields missing");
  }
  if (!inv_ref.multi_use && inv_ref.uses > 0) return refuse("invitation-used", "one-time invitation already used");
  if (wallet_.seen_request_nonces.count(nonce)) return refuse("replayed-request", "request nonce already seen");
  crypto::VerificationKey their_vk;
  try {
    their_vk = crypto::VerificationKey::from_base58(verkey);
  } catch (const Error&) {
    return refuse("malformed", "bad verkey");
  }
  if (crypto::did_from_verkey(their_vk) != did) return refuse("malformed", "DID does not derive from verkey");
  if (!verify_b58(verkey, confirm_bytes(did, verkey, nonce, inv_ref.id), sig)) {
    return refuse("bad-signature", "request signature does not verify");
  }

  auto& inv = wallet_.invitations.at(inv_ref.id);
  inv.uses += 1;
  wallet_.seen_request_nonces.insert(nonce);

  auto me = agent::create_did(rng_, Visibility::kPairwise);
  Connection c;
  c.id = new_thread_id(rng_);
  c.my_did = me.id;
  c.my_key = me.key;
  c.their_did = did;
  c.their_vk = their_vk;
  c.label = label;
  c.state = "complete";
  c.invitation_id = inv.id;
  c.invitation_key = inv.key.verification_key();
  c.request_nonce = nonce;
  c.established_at = wallet_.clock;
  wallet_.connections[c.id] = c;
  const auto my_vk = me.key.verification_key().base58();
  key_index_[my_vk] = {false, c.id};

  const auto confirm = confirm_bytes(me.id, my_vk, nonce, inv.id);
  auto reply = make_reply(msg, "response",
                          {{"did", me.id},
                           {"verkey", my_vk},
                           {"label", inv.label},
                           {"request_nonce", nonce},
                           {"signature", me.key.sign(crypto::as_bytes(confirm)).hex()},
                           {"invitation_signature", inv.key.sign(crypto::as_bytes(confirm)).hex()}},
                          rng_);
  sent_.push_back({{"connection_id", c.id}, {"message", reply.to_json()}});
  fx.out.push_back(pack_authcrypt(me.key, their_vk, crypto::as_bytes(reply.canonical()), rng_));
  fx.events.push_back({{"type", "connected"}, {"connection_id", c.id}, {"label", label}, {"role", "inviter"},
                       {"invitation_id", inv.id}});
  for (auto& hook : connection_hooks_) hook(*this, wallet_.connections.at(c.id), fx);
  return fx;
}

Effects Agent::handle_response(Connection& conn, const Unpacked& unpacked, const Message& msg) {
  Effects fx;
  auto abort = [&](const std::string& code, const std::string& why) {
    conn.state = "aborted";
    fx.events.push_back({{"type", "connection-aborted"}, {"connection_id", conn.id}, {"code", code}, {"detail", why}});
    return fx;
  };
  if (msg.protocol == kConnectionsProtocol && msg.type == kProblemReport) {
    return abort(msg.body.value("code", "refused"), msg.body.value("explanation", ""));
  }
  if (msg.protocol != kConnectionsProtocol || msg.type != "response" || msg.thread_id != conn.id) {
    return abort("unexpected-message", "expected a connection response");
  }
  const auto& b = msg.body;
  std::string did, verkey, nonce, sig, inv_sig;
  try {
    did = b.at("did").get<std::string>();
    verkey = b.at("verkey").get<std::string>();
    nonce = b.at("request_nonce").get<std::string>();
    sig = b.at("signature").get<std::string>();
    inv_sig = b.at("invitation_signature").get<std::string>();
  } catch (const json::exception&) {
    return abort("malformed", "response fields missing");
  }
  crypto::VerificationKey their_vk;
  try {
    their_vk = crypto::VerificationKey::from_base58(verkey);
  } catch (const Error&) {
    return abort("malformed", "bad verkey");
  }
  if (!unpacked.sender || *unpacked.sender != their_vk) return abort("key-mismatch", "sender key differs from body");
  if (crypto::did_from_verkey(their_vk) != did) return abort("malformed", "DID does not derive from verkey");
  if (nonce != conn.request_nonce) return abort("key-mismatch", "response answers another request");
  const auto confirm = confirm_bytes(did, verkey, nonce, conn.invitation_id);
  if (!verify_b58(verkey, confirm, sig)) return abort("key-mismatch", "new key did not confirm");
  if (!crypto::verify(conn.invitation_key, crypto::as_bytes(confirm), crypto::Signature::from_hex(inv_sig))) {
    return abort("key-mismatch", "invitation key did not confirm");
  }
  conn.their_did = did;
  conn.their_vk = their_vk;
  conn.state = "complete";
  conn.established_at = wallet_.clock;
  if (b.contains("label") && b["label"].is_string()) conn.label = b["label"].get<std::string>();
  fx.events.push_back({{"type", "connected"}, {"connection_id", conn.id}, {"label", conn.label}, {"role", "invitee"}});
  for (auto& hook : connection_hooks_) hook(*this, conn, fx);
  return fx;
}

Effects Agent::dispatch(const Envelope& envelope) {
  auto it = key_index_.find(envelope.to);
  if (it == key_index_.end()) throw Error("unknown-recipient", "no key for " + envelope.to);
  ++wallet_.clock;
  const auto [is_invitation, id] = it->second;

  if (is_invitation) {
    const auto& inv = wallet_.invitations.at(id);
    auto unpacked = unpack(inv.key, envelope);
    auto msg = Message::parse(crypto::to_string(unpacked.payload));
    if (!wallet_.seen_message_ids.insert(msg.id).second) return {};
    received_.push_back({{"connection_id", ""}, {"sender", "anonymous"}, {"message", msg.to_json()}});
    return handle_request(inv, msg);
  }

  auto& conn = wallet_.connections.at(id);
  auto unpacked = unpack(conn.my_key, envelope);
  auto msg = Message::parse(crypto::to_string(unpacked.payload));
  if (conn.state == "requested") {
    if (!wallet_.seen_message_ids.insert(msg.id).second) return {};
    received_.push_back({{"connection_id", conn.id},
                         {"sender", unpacked.sender ? unpacked.sender->base58() : "anonymous"},
                         {"message", msg.to_json()}});
    return handle_response(conn, unpacked, msg);
  }
  if (conn.state != "complete") throw Error("connection-closed", "connection " + conn.id + " is " + conn.state);
  if (!unpacked.sender || *unpacked.sender != conn.their_vk) {
    throw Error("auth-failed", "sender is not the connection peer");
  }
  if (!wallet_.seen_message_ids.insert(msg.id).second) return {};
  received_.push_back({{"connection_id", conn.id}, {"sender", conn.their_vk.base58()}, {"message", msg.to_json()}});

  Effects fx;
  if (msg.type == kProblemReport) {
    fx.events.push_back({{"type", "problem-report"}, {"connection_id", conn.id}, {"protocol", msg.protocol},
                         {"thread_id", msg.thread_id}, {"body", msg.body}});
  }
  std::vector<Handler*> targets;
  if (auto h = handlers_.find(msg.protocol); h != handlers_.end()) {
    for (auto& route : h->second) {
      if (msg.type == kProblemReport || route.types.empty() || route.types.count(msg.type)) {
        targets.push_back(&route.handler);
      }
    }
  }
  if (targets.empty()) {
    if (msg.type != kProblemReport) {
      send(conn.id, make_problem_report(msg, "unsupported-protocol", "no handler for " + msg.protocol + " " + msg.type, rng_),
           fx);
    }
    return fx;
  }
  for (auto* handler : targets) {
    try {
      (*handler)(*this, conn, msg, fx);
    } catch (const Error& e) {
      if (msg.type != kProblemReport) send(conn.id, make_problem_report(msg, e.code(), e.what(), rng_), fx);
      fx.events.push_back({{"type", "refused"}, {"connection_id", conn.id}, {"protocol", msg.protocol},
                           {"message_type", msg.type}, {"code", e.code()}, {"detail", e.what()}});
    }
  }
  return fx;
}

void Agent::on(const std::string& protocol, Handler handler, std::set<std::string> types) {
  handlers_[protocol].push_back({std::move(types), std::move(handler)});
}

Envelope Agent::pack_for(const std::string& connection_id, const Message& message) {
  const auto& c = connection(connection_id);
  if (c.state != "complete") throw Error("connection-closed", "connection " + connection_id + " is " + c.state);
  sent_.push_back({{"connection_id", c.id}, {"message", message.to_json()}});
  return pack_authcrypt(c.my_key, c.their_vk, crypto::as_bytes(message.canonical()), rng_);
}

void Agent::send(const std::string& connection_id, const Message& message, Effects& fx) {
  fx.out.push_back(pack_for(connection_id, message));
}

const Connection& Agent::connection(const std::string& id) const {
  auto it = wallet_.connections.find(id);
  if (it == wallet_.connections.end()) throw Error("unknown-connection", "no connection " + id);
  return it->second;
}

std::vector<const Connection*> Agent::list_connections() const {
  std::vector<const Connection*> out;
  for (const auto& [id, c] : wallet_.connections) out.push_back(&c);
  return out;
}

}  // namespace omic::agent
