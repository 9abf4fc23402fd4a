#include "omic/credentials/protocols.hpp"

#include "omic/error.hpp"
#include "omic/ledger/builders.hpp"

namespace omic::credentials {

using agent::Agent;
using agent::Connection;
using agent::Effects;
using agent::Message;

namespace {

const ledger::SchemaRecord& schema_for(const ledger::LedgerState& state, const std::string& cred_def_id) {
  const auto* cd = state.cred_def(cred_def_id);
  if (!cd) throw Error("unknown-cred-def", cred_def_id + " is not on the ledger");
  const auto* schema = state.schema(cd->schema_id);
  if (!schema) throw Error("unknown-schema", cd->schema_id + " is not on the ledger");
  return *schema;
}

}  // namespace

IssuerService::IssuerService(Agent& agent, std::string cred_def_id) : agent_(agent), cred_def_id_(std::move(cred_def_id)) {
  agent_.on(
      std::string(kIssueProtocol),
      [this](Agent& self, const Connection& c, const Message& m, Effects& fx) { handle(self, c, m, fx); },
      {"request", "ack"});
}

std::string IssuerService::offer(const std::string& connection_id, const json& values, Effects& fx) {
  const auto& schema = schema_for(agent_.ledger().state(), cred_def_id_);
  for (const auto& spec : schema.attributes) {
    if (!values.contains(spec.name)) throw Error("missing-attribute", "no value for " + spec.name);
    canonicalize(spec, values.at(spec.name));
  }
  for (const auto& [k, v] : values.items()) find_attribute(schema, k);
  const auto thread = agent::new_thread_id(agent_.rng());
  json names = json::array();
  for (const auto& spec : schema.attributes) names.push_back(spec.name);
  agent_.send(connection_id,
              agent::make_message(std::string(kIssueProtocol), "offer", thread,
                                  {{"cred_def_id", cred_def_id_}, {"schema_id", schema.id}, {"attributes", names}},
                                  agent_.rng()),
              fx);
  pending_[thread] = values;
  return thread;
}

void IssuerService::handle(Agent& self, const Connection& conn, const Message& msg, Effects& fx) {
  if (msg.type == agent::kProblemReport) {
    pending_.erase(msg.thread_id);
    return;
  }
  if (msg.type == "request") {
    auto it = pending_.find(msg.thread_id);
    if (it == pending_.end()) throw Error("unknown-thread", "no offer on this thread");
    if (msg.body.value("cred_def_id", "") != cred_def_id_) throw Error("malformed", "request names another cred-def");
    const auto& schema = schema_for(self.ledger().state(), cred_def_id_);
    auto held = issue_credential(self.public_did().key, cred_def_id_, schema, it->second, self.rng());
    auto& issued = self.wallet().records["issued"];
    issued[msg.thread_id] = {{"cred_def_id", cred_def_id_},
                             {"serial", crypto::to_hex(held.credential.serial)},
                             {"revocation_handle", held.credential.revocation_handle.hex()},
                             {"connection_id", conn.id}};
    pending_.erase(it);
    json tokens = json::object();
    for (const auto& [k, v] : held.holder_tokens) tokens[k] = v.hex();
    self.send(conn.id,
              agent::make_reply(msg, "issue",
                                {{"credential", held.credential.to_json()},
                                 {"holder_tokens", tokens},
                                 {"encoded", held.encoded}},
                                self.rng()),
              fx);
    return;
  }
  if (msg.type == "ack") {
    fx.events.push_back({{"type", "credential-issued"}, {"thread_id", msg.thread_id}, {"cred_def_id", cred_def_id_}});
    return;
  }
  throw Error("unexpected-message", "issuer does not handle " + msg.type);
}

ledger::Receipt IssuerService::revoke(const std::string& thread_id) {
  const auto handle = handle_for(thread_id);
  if (!handle) throw Error("unknown-thread", "nothing issued on " + thread_id);
  const auto* cd = agent_.ledger().state().cred_def(cred_def_id_);
  if (!cd) throw Error("unknown-cred-def", cred_def_id_);
  return agent_.ledger().submit(
      ledger::make_revoc_entry(agent_.public_did().key, cd->revoc_reg_id, {*handle}, agent_.rng()));
}

std::optional<crypto::Digest32> IssuerService::handle_for(const std::string& thread_id) const {
  const auto& rec = agent_.wallet().records;
  if (!rec.contains("issued") || !rec["issued"].contains(thread_id)) return std::nullopt;
  return crypto::Digest32::from_hex(rec["issued"][thread_id]["revocation_handle"].get<std::string>());
}

HolderService::HolderService(Agent& agent) : agent_(agent) {
  agent_.on(
      std::string(kIssueProtocol),
      [this](Agent& self, const Connection& c, const Message& m, Effects& fx) { handle(self, c, m, fx); },
      {"offer", "issue"});
}

void HolderService::handle(Agent& self, const Connection& conn, const Message& msg, Effects& fx) {
  if (msg.type == agent::kProblemReport) {
    requested_threads_.erase(msg.thread_id);
    return;
  }
  if (msg.type == "offer") {
    const auto cd_id = msg.body.value("cred_def_id", "");
    if (!self.ledger().state().cred_def(cd_id)) throw Error("unknown-cred-def", "offered cred-def is not on the ledger");
    if (offer_policy_) {
      if (auto why = offer_policy_(conn, msg.body)) throw Error("declined", *why);
    }
    fx.events.push_back({{"type", "credential-offer"}, {"connection_id", conn.id}, {"cred_def_id", cd_id}});
    requested_threads_.insert(msg.thread_id);
    self.send(conn.id, agent::make_reply(msg, "request", {{"cred_def_id", cd_id}}, self.rng()), fx);
    fx.events.push_back({{"type", "credential-request"}, {"connection_id", conn.id}, {"thread_id", msg.thread_id}});
    return;
  }
  if (msg.type == "issue") {
    if (!requested_threads_.count(msg.thread_id)) throw Error("unknown-thread", "no request on this thread");
    HeldCredential held;
    try {
      held.credential = Credential::from_json(msg.body.at("credential"));
      for (const auto& [k, v] : msg.body.at("holder_tokens").items()) {
        held.holder_tokens[k] = crypto::Digest32::from_hex(v.get<std::string>());
      }
      held.encoded = msg.body.at("encoded").get<std::map<std::string, std::int64_t>>();
    } catch (const json::exception& e) {
      throw Error("malformed", e.what());
    }
    if (auto why = check_held_credential(held, self.ledger().state())) throw Error("bad-credential", *why);
    if (credential_policy_) {
      if (auto why = credential_policy_(conn, held)) throw Error("declined", *why);
    }
    held.id = msg.thread_id.substr(0, 16);
    auto j = held.to_json();
    j["connection_id"] = conn.id;
    self.wallet().credentials[held.id] = j;
    requested_threads_.erase(msg.thread_id);
    self.send(conn.id, agent::make_reply(msg, "ack", json::object(), self.rng()), fx);
    fx.events.push_back({{"type", "credential-stored"},
                         {"connection_id", conn.id},
                         {"credential_id", held.id},
                         {"cred_def_id", held.credential.cred_def_id}});
    return;
  }
  throw Error("unexpected-message", "holder does not handle " + msg.type);
}

std::vector<HeldCredential> HolderService::credentials() const {
  std::vector<HeldCredential> out;
  for (const auto& [id, j] : agent_.wallet().credentials.items()) out.push_back(HeldCredential::from_json(j));
  return out;
}

std::optional<HeldCredential> HolderService::find(const std::string& cred_def_id) const {
  std::optional<HeldCredential> out;
  for (auto& h : credentials()) {
    if (h.credential.cred_def_id == cred_def_id) out = h;
  }
  return out;
}

VerifierService::VerifierService(Agent& agent) : agent_(agent) {
  agent_.on(
      std::string(kProofProtocol),
      [this](Agent& self, const Connection& c, const Message& m, Effects& fx) { handle(self, c, m, fx); },
      {"presentation"});
}

std::string VerifierService::request(const std::string& connection_id, const PresentationRequest& req, Effects& fx) {
  const auto thread = agent::new_thread_id(agent_.rng());
  nonces_.issue(req.nonce);
  outstanding_[thread] = req;
  agent_.send(connection_id, agent::make_message(std::string(kProofProtocol), "request", thread, req.to_json(), agent_.rng()),
              fx);
  return thread;
}

void VerifierService::handle(Agent& self, const Connection& conn, const Message& msg, Effects& fx) {
  if (msg.type == agent::kProblemReport) {
    outstanding_.erase(msg.thread_id);
    return;
  }
  if (msg.type != "presentation") throw Error("unexpected-message", "verifier does not handle " + msg.type);
  auto it = outstanding_.find(msg.thread_id);
  if (it == outstanding_.end()) throw Error("unknown-thread", "no request on this thread");
  const auto p = Presentation::from_json(msg.body);
  const auto report = verify_presentation(p, it->second, self.ledger().state(), nonces_);
  outstanding_.erase(it);
  self.send(conn.id, agent::make_reply(msg, "ack", report.to_json(), self.rng()), fx);
  fx.events.push_back({{"type", "presentation-verified"}, {"thread_id", msg.thread_id}, {"report", report.to_json()}});
  if (sink_) sink_(msg.thread_id, report);
}

ProverService::ProverService(Agent& agent, HolderService& holder) : agent_(agent), holder_(holder) {
  agent_.on(
      std::string(kProofProtocol),
      [this](Agent& self, const Connection& c, const Message& m, Effects& fx) { handle(self, c, m, fx); },
      {"request", "ack"});
}

void ProverService::handle(Agent& self, const Connection& conn, const Message& msg, Effects& fx) {
  if (msg.type == agent::kProblemReport) return;
  if (msg.type == "ack") {
    fx.events.push_back({{"type", "verification-result"}, {"thread_id", msg.thread_id}, {"report", msg.body}});
    return;
  }
  if (msg.type != "request") throw Error("unexpected-message", "prover does not handle " + msg.type);
  const auto req = PresentationRequest::from_json(msg.body);
  if (policy_) {
    if (auto why = policy_(conn, req)) throw Error("declined", *why);
  }
  const auto held = holder_.credentials();
  const auto p = create_presentation(held, req, self.ledger().state().height(), self.rng());
  self.send(conn.id, agent::make_reply(msg, "presentation", p.to_json(), self.rng()), fx);
}

bool check_revocation(const ledger::LedgerState& state, const std::string& registry_id,
                      const crypto::Digest32& handle) {
  return state.is_revoked(registry_id, handle, state.height());
}

}  // namespace omic::credentials
