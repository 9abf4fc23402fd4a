#include "omic/exchange/actors.hpp"

#include <algorithm>

#include "omic/error.hpp"

namespace omic::exchange {

using agent::Agent;
using agent::Connection;
using agent::Effects;
using agent::Message;
using credentials::HeldCredential;
using credentials::Presentation;
using credentials::PresentationRequest;

namespace {

std::string digest_of(const Message& m) { return crypto::hash(m.canonical()).hex(); }

std::map<std::string, std::string> attribute_values(const credentials::Credential& c) {
  std::map<std::string, std::string> out;
  for (const auto& a : c.attributes) out[a.name] = a.value;
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

json held_json(const HeldCredential& held) {
  json tokens = json::object();
  for (const auto& [k, v] : held.holder_tokens) tokens[k] = v.hex();
  return {{"credential", held.credential.to_json()}, {"holder_tokens", tokens}, {"encoded", held.encoded}};
}

HeldCredential held_from_body(const json& body) {
  HeldCredential held;
  try {
    held.credential = credentials::Credential::from_json(body.at("credential"));
    for (const auto& [k, v] : body.at("holder_tokens").items()) {
      held.holder_tokens[k] = crypto::Digest32::from_hex(v.get<std::string>());
    }
    held.encoded = body.at("encoded").get<std::map<std::string, std::int64_t>>();
  } catch (const json::exception& e) {
    throw Error("malformed", e.what());
  }
  return held;
}

}  // namespace

// ---------------------------------------------------------------- Myco

Myco::Myco(Agent& agent, std::vector<BiomarkerSpec> panel, std::string panel_name)
    : agent_(agent), panel_(std::move(panel)), panel_name_(std::move(panel_name)) {}

void Myco::setup() {
  if (!agent_.wallet().public_did) agent_.register_public_did("issuer");
  std::vector<ledger::AttributeSpec> attrs = {{"sample_id", "string", 0, 0}};
  for (const auto& b : panel_) attrs.push_back({b.name, "int", b.precision, b.v_max});
  schema_id_ = credentials::define_schema(agent_, panel_name_, "1.0", attrs).id;
  issuer_ = std::make_unique<credentials::IssuerService>(
      agent_, credentials::publish_cred_def(agent_, schema_id_).cred_def_id);
}

std::string Myco::issue(const std::string& connection_id, const std::string& sample_id,
                        const std::vector<BiomarkerRecord>& records, Effects& fx) {
  if (!issuer_) throw Error("not-ready", "MYco has no cred-def yet");
  json values = {{"sample_id", sample_id}};
  for (const auto& r : records) {
    auto it = std::find_if(panel_.begin(), panel_.end(), [&](const BiomarkerSpec& b) { return b.name == r.name; });
    if (it == panel_.end()) throw Error("unknown-biomarker", r.name + " is not on the panel");
    if (r.unit != it->unit) throw Error("unit-mismatch", r.name + " is measured in " + it->unit);
    if (values.contains(r.name)) throw Error("duplicate-biomarker", r.name + " appears twice");
    values[r.name] = r.value;
  }
  return issuer_->offer(connection_id, values, fx);
}

// ---------------------------------------------------------------- Researcher

Researcher::Researcher(Agent& agent, DayClock today) : agent_(agent), today_(std::move(today)), holder_(agent) {
  agent_.on(
      std::string(kHandshakeProtocol),
      [this](Agent& self, const Connection& c, const Message& m, Effects& fx) { handle(self, c, m, fx); });
  agent_.on(
      std::string(kEthicsProtocol), [this](Agent&, const Connection&, const Message& m, Effects&) { handle_decision(m); },
      {"decision"});
  agent_.on_connected([this](Agent& self, const Connection& c, Effects& fx) { on_connected(self, c, fx); });
}

void Researcher::setup() {
  agent_.register_public_did("researcher");
  const auto schema = credentials::define_schema(agent_, "research-reward", "1.0", reward_schema_attributes());
  reward_cred_def_id_ = credentials::publish_cred_def(agent_, schema.id).cred_def_id;
}

std::string Researcher::apply(const std::string& erb_connection, const ResearchProject& project,
                              const std::string& summary, Effects& fx) {
  EthicsApplication app{agent_.public_did().id, project, summary};
  const auto thread = agent::new_thread_id(agent_.rng());
  agent_.send(erb_connection,
              agent::make_message(std::string(kEthicsProtocol), "application", thread, app.to_json(), agent_.rng()), fx);
  return thread;
}

void Researcher::handle_decision(const Message& msg) {
  decisions_[msg.body.value("project_id", "")] = msg.body;
}

std::optional<json> Researcher::decision(const std::string& project_id) const {
  auto it = decisions_.find(project_id);
  if (it == decisions_.end()) return std::nullopt;
  return std::optional<json>(std::in_place, it->second);
}

namespace {

std::vector<HeldCredential> certificates_for(const std::vector<HeldCredential>& held, const std::string& project_id) {
  std::vector<HeldCredential> out;
  for (const auto& h : held) {
    auto values = attribute_values(h.credential);
    if (values.count("approved_attrs_hash") && values["project_id"] == project_id) out.push_back(h);
  }
  return out;
}

}  // namespace

bool Researcher::has_certificate(const std::string& project_id) const {
  return !certificates_for(holder_.credentials(), project_id).empty();
}

Advert Researcher::publish(BulletinBoard& board, const ResearchProject& project) {
  return publish_via(project, board.challenge(),
                     [&](const Advert& a, const std::optional<Presentation>& p, const credentials::PresentationRequest& c) {
                       return board.publish(a, p, c);
                     });
}

Advert Researcher::publish_via(const ResearchProject& project, const credentials::PresentationRequest& challenge,
                               const AdvertPoster& post) {
  const auto certs = certificates_for(holder_.credentials(), project.project_id);
  const auto inv = agent_.create_invitation(agent_.label(), true);
  auto advert = make_advert(project, agent_.public_did().id, inv);
  std::optional<Presentation> p;
  if (!certs.empty()) {
    try {
      p = credentials::create_presentation(certs, challenge, agent_.ledger().state().height(), agent_.rng());
    } catch (const Error& e) {
      throw Error("certificate-rejected", std::string("cannot present the certificate: ") + e.what());
    }
  }
  auto stored = post(advert, p, challenge);
  projects_[project.project_id] = {project, inv["id"].get<std::string>(), stored.advert_id};
  return stored;
}

const HandshakeSession& Researcher::session(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown-session", id);
  return it->second;
}

const Researcher::Project& Researcher::project_for(const HandshakeSession& s) const {
  return projects_.at(s.project_id);
}

void Researcher::record(HandshakeSession& s, const std::string& event, const std::string& direction,
                        const std::string& digest, json detail) {
  s.transcript.push_back({++agent_.wallet().clock, event, direction, to_string(s.state), digest, std::move(detail)});
}

void Researcher::set_state(HandshakeSession& s, SessionState st) { s.state = st; }

void Researcher::persist(const HandshakeSession& s) { agent_.wallet().records["sessions"][s.id] = s.to_json(); }

void Researcher::send(HandshakeSession& s, const std::string& type, json body, Effects& fx) {
  auto msg = agent::make_message(std::string(kHandshakeProtocol), type, s.thread_id, std::move(body), agent_.rng());
  agent_.send(s.connection_id, msg, fx);
  record(s, type, "sent", digest_of(msg));
}

void Researcher::on_connected(Agent&, const Connection& conn, Effects& fx) {
  auto it = std::find_if(projects_.begin(), projects_.end(),
                         [&](const auto& kv) { return kv.second.invitation_id == conn.invitation_id; });
  if (conn.invitation_id.empty() || it == projects_.end()) return;
  const auto& p = it->second;
  HandshakeSession s;
  s.id = s.thread_id = agent::new_thread_id(agent_.rng());
  s.role = "researcher";
  s.project_id = p.project.project_id;
  s.advert_id = p.advert_id;
  s.connection_id = conn.id;
  set_state(s, SessionState::kConnected);
  record(s, "connect", "local");
  set_state(s, SessionState::kTermsPresented);
  send(s, "terms",
       {{"project_id", s.project_id},
        {"advert_id", s.advert_id},
        {"consent_terms", p.project.consent_terms},
        {"terms_hash", p.project.terms_hash().hex()}},
       fx);
  const auto certs = certificates_for(holder_.credentials(), s.project_id);
  send(s, "ethics-offer",
       {{"project_id", s.project_id},
        {"cred_def_id", certs.empty() ? std::string() : certs.back().credential.cred_def_id}},
       fx);
  persist(s);
  sessions_.emplace(s.id, std::move(s));
}

void Researcher::abort(const std::string& session_id, const std::string& reason, Effects& fx) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error("unknown-session", session_id);
  auto& s = it->second;
  if (is_terminal(s.state)) throw Error("session-closed", "session already ended");
  s.abort_reason = reason;
  set_state(s, SessionState::kAborted);
  send(s, "abort", {{"reason", reason}}, fx);
  persist(s);
}

void Researcher::send_reward(HandshakeSession& s, Effects& fx) {
  const auto& p = project_for(s);
  const auto& state = agent_.ledger().state();
  const auto* cd = state.cred_def(reward_cred_def_id_);
  if (!cd) throw Error("not-ready", "reward cred-def is not on the ledger");
  crypto::Signature consent_sig;
  if (!s.consent.is_null()) consent_sig = crypto::Signature::from_hex(s.consent.at("signature").get<std::string>());
  const json values = {{"project_id", s.project_id},
                       {"amount", reward_override_.value_or(p.project.reward.amount)},
                       {"kind", p.project.reward.kind},
                       {"session_hash", session_hash(s.thread_id, s.project_id, consent_sig).hex()}};
  auto held = credentials::issue_credential(agent_.public_did().key, reward_cred_def_id_, *state.schema(cd->schema_id),
                                            values, agent_.rng());
  s.reward = {{"amount", values["amount"]}, {"revocation_handle", held.credential.revocation_handle.hex()}};
  send(s, "reward", held_json(held), fx);
}

void Researcher::force_reward(const std::string& session_id, Effects& fx) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error("unknown-session", session_id);
  send_reward(it->second, fx);
  persist(it->second);
}

void Researcher::handle(Agent& self, const Connection& conn, const Message& msg, Effects& fx) {
  auto it = sessions_.find(msg.thread_id);
  if (it == sessions_.end() || it->second.connection_id != conn.id) {
    if (msg.type == agent::kProblemReport) return;
    throw Error("unknown-session", "no session on this thread");
  }
  auto& s = it->second;
  const auto& t = msg.type;
  const auto& body = msg.body;
  if (t == agent::kProblemReport) {
    record(s, "problem-report", "received", digest_of(msg), body);
    persist(s);
    return;
  }
  if (t == "abort") {
    if (is_terminal(s.state)) return;
    s.abort_reason = body.value("reason", "aborted");
    set_state(s, SessionState::kAborted);
    record(s, "abort", "received", digest_of(msg), body);
    persist(s);
    return;
  }
  auto require = [&](SessionState st) {
    if (s.state != st) throw Error("out-of-order", t + " is not expected in " + to_string(s.state));
  };
  const auto& project = project_for(s).project;

  if (t == "ethics-request") {
    require(SessionState::kTermsPresented);
    const auto req = PresentationRequest::from_json(body);
    const auto certs = certificates_for(holder_.credentials(), s.project_id);
    if (certs.empty()) throw Error("no-certificate", "no ethics certificate for this project");
    const auto p = credentials::create_presentation(certs, req, self.ledger().state().height(), self.rng());
    record(s, t, "received", digest_of(msg));
    send(s, "ethics-presentation", p.to_json(), fx);
  } else if (t == "ethics-ack") {
    require(SessionState::kTermsPresented);
    record(s, t, "received", digest_of(msg));
    set_state(s, SessionState::kEthicsVerified);
    std::vector<credentials::RequestedCredential> predicates;
    for (const auto& c : project.criteria) predicates.push_back({c.cred_def_id, {}, c.predicates});
    auto req = credentials::make_request(predicates, s.project_id, self.rng());
    if (tamper_) tamper_(req);
    nonces_.issue(req.nonce);
    eligibility_requests_[s.thread_id] = req;
    send(s, "eligibility-request", req.to_json(), fx);
  } else if (t == "eligibility-presentation") {
    require(SessionState::kEthicsVerified);
    auto rit = eligibility_requests_.find(s.thread_id);
    if (rit == eligibility_requests_.end()) throw Error("out-of-order", "no eligibility request outstanding");
    const auto p = Presentation::from_json(body);
    record(s, t, "received", digest_of(msg));
    const auto report = credentials::verify_presentation(p, rit->second, self.ledger().state(), nonces_);
    eligibility_requests_.erase(rit);
    s.eligibility_report = report.to_json();
    if (report.accept) {
      set_state(s, SessionState::kEligibilityProven);
      const auto reveal = project.reveal_set();
      s.requested.assign(reveal.begin(), reveal.end());
      send(s, "eligibility-result", {{"accept", true}, {"requested", s.requested}}, fx);
    } else {
      s.abort_reason = "ineligible";
      set_state(s, SessionState::kAborted);
      send(s, "eligibility-result", {{"accept", false}}, fx);
    }
  } else if (t == "consent") {
    require(SessionState::kEligibilityProven);
    auto rec = ConsentRecord::from_json(body.at("consent"));
    bool subset = std::all_of(rec.selected.begin(), rec.selected.end(),
                              [&](const std::string& a) { return contains(s.requested, a); });
    if (!rec.verify() || rec.signer != conn.their_vk || rec.session_id != s.thread_id ||
        rec.project_id != s.project_id || rec.terms_hash != project.terms_hash().hex() ||
        rec.purpose_id != s.project_id || !subset) {
      throw Error("bad-consent", "consent record does not match this session");
    }
    record(s, t, "received", digest_of(msg));
    rec.countersigner = conn.my_key.verification_key();
    rec.countersignature = conn.my_key.sign(crypto::as_bytes(rec.signing_bytes()));
    s.consent = rec.to_json();
    s.selected = rec.selected;
    set_state(s, SessionState::kConsented);
    send(s, "consent-receipt", {{"consent", s.consent}}, fx);
  } else if (t == "data") {
    require(SessionState::kConsented);
    const auto pkg = DataPackage::from_json(body);
    record(s, t, "received", digest_of(msg));
    const auto consent = ConsentRecord::from_json(s.consent);
    const auto report = verify_data_package(pkg, consent, project.criteria, s.project_id, self.ledger().state());
    s.data_report = report.to_json();
    if (!report.accept) {
      s.abort_reason = "bad-data";
      set_state(s, SessionState::kAborted);
      send(s, "abort", {{"reason", "bad-data"}}, fx);
      persist(s);
      return;
    }
    data_[s.thread_id] = report.revealed;
    set_state(s, SessionState::kDataTransferred);
    const auto pkg_digest = crypto::hash(pkg.to_json().dump());
    send(s, "data-ack",
         {{"package_digest", pkg_digest.hex()}, {"signature", conn.my_key.sign(pkg_digest.view()).hex()}}, fx);
    try {
      send_reward(s, fx);
    } catch (const Error& e) {
      record(s, "reward-failed", "local", "", {{"code", e.code()}});
    }
  } else if (t == "reward-ack") {
    require(SessionState::kDataTransferred);
    if (s.index_of("reward") < 0) throw Error("out-of-order", "no reward was sent");
    record(s, t, "received", digest_of(msg));
    set_state(s, SessionState::kRewarded);
    ++rewards_issued_;
  } else {
    throw Error("unexpected-message", "researcher does not handle " + t);
  }
  persist(s);
}

// ---------------------------------------------------------------- DataOwner

DataOwner::DataOwner(Agent& agent, std::string trusted_ethics_cred_def, DayClock today, OwnerPolicy policy)
    : agent_(agent),
      ethics_cred_def_(std::move(trusted_ethics_cred_def)),
      today_(std::move(today)),
      policy_(std::move(policy)),
      holder_(agent) {
  agent_.on(
      std::string(kHandshakeProtocol),
      [this](Agent& self, const Connection& c, const Message& m, Effects& fx) { handle(self, c, m, fx); });
  agent_.on_connected([this](Agent& self, const Connection& c, Effects& fx) { on_connected(self, c, fx); });
}

std::string DataOwner::start(const Advert& advert, Effects& fx) {
  auto [conn_id, env] = agent_.accept_invitation(advert.invitation, std::string(kAnonymousLabel));
  HandshakeSession s;
  s.id = s.connection_id = conn_id;
  s.role = "owner";
  s.project_id = advert.project_id;
  s.advert_id = advert.advert_id;
  s.state = SessionState::kAdvertSeen;
  adverts_[s.id] = advert;
  persist(s);
  sessions_.emplace(s.id, std::move(s));
  fx.out.push_back(std::move(env));
  return conn_id;
}

const HandshakeSession& DataOwner::session(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown-session", id);
  return it->second;
}

HandshakeSession& DataOwner::session_mut(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown-session", id);
  return it->second;
}

Advert DataOwner::advert_for(const HandshakeSession& s) const { return adverts_.at(s.id); }

void DataOwner::record(HandshakeSession& s, const std::string& event, const std::string& direction,
                       const std::string& digest, json detail) {
  s.transcript.push_back({++agent_.wallet().clock, event, direction, to_string(s.state), digest, std::move(detail)});
}

void DataOwner::set_state(HandshakeSession& s, SessionState st) { s.state = st; }

void DataOwner::persist(const HandshakeSession& s) {
  auto& rec = agent_.wallet().records;
  rec["sessions"][s.id] = s.to_json();
  if (auto it = adverts_.find(s.id); it != adverts_.end()) rec["adverts"][s.id] = it->second.to_json();
}

void DataOwner::reload() {
  sessions_.clear();
  adverts_.clear();
  const auto& rec = agent_.wallet().records;
  if (rec.contains("sessions")) {
    for (const auto& [id, j] : rec["sessions"].items()) sessions_.emplace(id, HandshakeSession::from_json(j));
  }
  if (rec.contains("adverts")) {
    for (const auto& [id, j] : rec["adverts"].items()) adverts_.emplace(id, Advert::from_json(j));
  }
}

void DataOwner::send(HandshakeSession& s, const std::string& type, json body, Effects& fx) {
  auto msg = agent::make_message(std::string(kHandshakeProtocol), type, s.thread_id, std::move(body), agent_.rng());
  agent_.send(s.connection_id, msg, fx);
  record(s, type, "sent", digest_of(msg));
}

void DataOwner::on_connected(Agent&, const Connection& conn, Effects&) {
  auto it = sessions_.find(conn.id);
  if (it == sessions_.end() || it->second.state != SessionState::kAdvertSeen) return;
  set_state(it->second, SessionState::kConnected);
  record(it->second, "connect", "local");
  persist(it->second);
}

void DataOwner::abort_session(HandshakeSession& s, const std::string& reason, Effects& fx) {
  s.abort_reason = reason;
  set_state(s, SessionState::kAborted);
  if (!s.thread_id.empty()) {
    send(s, "abort", {{"reason", reason}}, fx);
  } else {
    record(s, "abort", "local", "", {{"reason", reason}});
  }
  persist(s);
}

void DataOwner::abort(const std::string& session_id, const std::string& reason, Effects& fx) {
  auto& s = session_mut(session_id);
  if (is_terminal(s.state)) throw Error("session-closed", "session already ended");
  abort_session(s, reason, fx);
}

void DataOwner::send_ethics_request(HandshakeSession& s, Effects& fx) {
  auto req = ethics_request(ethics_cred_def_, today_(), "ethics:" + s.project_id, agent_.rng());
  nonces_.issue(req.nonce);
  ethics_requests_[s.id] = req;
  send(s, "ethics-request", req.to_json(), fx);
}

void DataOwner::accept_terms(const std::string& session_id, Effects& fx) {
  auto& s = session_mut(session_id);
  if (s.state != SessionState::kTermsPresented || s.index_of("ethics-offer") < 0 ||
      s.index_of("ethics-request") >= 0) {
    throw Error("out-of-order", "terms can only be accepted once, after they were presented");
  }
  send_ethics_request(s, fx);
  persist(s);
}

void DataOwner::answer_eligibility(HandshakeSession& s, Effects& fx) {
  if (policy_.decline_eligibility) {
    abort_session(s, "declined", fx);
    return;
  }
  const auto req = PresentationRequest::from_json(s.pending);
  s.pending = nullptr;
  Presentation p;
  try {
    p = credentials::create_presentation(ordered_credentials(s), req, agent_.ledger().state().height(), agent_.rng());
  } catch (const Error&) {
    // The researcher learns only that the owner is not eligible.
    abort_session(s, "ineligible", fx);
    return;
  }
  note_presented(s, p);
  send(s, "eligibility-presentation", p.to_json(), fx);
  persist(s);
}

void DataOwner::approve_eligibility(const std::string& session_id, Effects& fx) {
  auto& s = session_mut(session_id);
  if (s.state != SessionState::kEthicsVerified || s.pending.is_null()) {
    throw Error("out-of-order", "no eligibility request is waiting for approval");
  }
  answer_eligibility(s, fx);
}

void DataOwner::decline_eligibility(const std::string& session_id, Effects& fx) {
  auto& s = session_mut(session_id);
  if (s.state != SessionState::kEthicsVerified || s.pending.is_null()) {
    throw Error("out-of-order", "no eligibility request is waiting for approval");
  }
  s.pending = nullptr;
  abort_session(s, "declined", fx);
}

void DataOwner::consent(const std::string& session_id, const std::vector<std::string>& selected, Effects& fx) {
  auto& s = session_mut(session_id);
  if (s.state != SessionState::kEligibilityProven) throw Error("out-of-order", "consent needs a proven eligibility");
  std::vector<std::string> chosen;
  for (const auto& a : selected) {
    if (!contains(s.requested, a)) throw Error("bad-selection", a + " was not requested");
    if (!contains(chosen, a)) chosen.push_back(a);
  }
  const auto& conn = agent_.connection(s.connection_id);
  const auto advert = advert_for(s);
  const auto rec = sign_consent(conn.my_key, s.thread_id, s.project_id, advert.terms_hash, s.project_id, chosen,
                                agent_.wallet().clock + 1);
  s.consent = rec.to_json();
  s.selected = chosen;
  set_state(s, SessionState::kConsented);
  send(s, "consent", {{"consent", s.consent}}, fx);
  persist(s);
}

void DataOwner::send_package(HandshakeSession& s, Effects& fx) {
  const auto consent = ConsentRecord::from_json(s.consent);
  const auto criteria = criteria_from_json(advert_for(s).criteria);
  const auto req = package_request(consent, criteria, s.project_id);
  DataPackage pkg{s.project_id, consent.terms_hash, consent_digest(consent).hex(),
                  credentials::create_presentation(ordered_credentials(s), req, agent_.ledger().state().height(),
                                                   agent_.rng())};
  note_presented(s, pkg.presentation);
  send(s, "data", pkg.to_json(), fx);
}

std::vector<HeldCredential> DataOwner::ordered_credentials(const HandshakeSession& s) const {
  auto held = holder_.credentials();
  const auto& rec = agent_.wallet().records;
  auto rank = [&](const HeldCredential& h) {
    if (!rec.contains("presented") || !rec["presented"].contains(h.id)) return 1;
    const auto& sessions = rec["presented"][h.id];
    return std::find(sessions.begin(), sessions.end(), s.id) != sessions.end() ? 2 : 0;
  };
  std::stable_sort(held.begin(), held.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  return held;
}

void DataOwner::note_presented(const HandshakeSession& s, const Presentation& p) {
  auto& presented = agent_.wallet().records["presented"];
  for (const auto& pc : p.credentials) {
    for (const auto& h : holder_.credentials()) {
      if (h.credential.merkle_root != pc.merkle_root) continue;
      auto& list = presented[h.id];
      if (std::find(list.begin(), list.end(), s.id) == list.end()) list.push_back(s.id);
    }
  }
}

std::vector<json> DataOwner::rewards() const {
  std::vector<json> out;
  const auto& rec = agent_.wallet().records;
  if (rec.contains("rewards")) {
    for (const auto& [id, j] : rec["rewards"].items()) out.push_back(j);
  }
  return out;
}

void DataOwner::handle(Agent& self, const Connection& conn, const Message& msg, Effects& fx) {
  auto it = sessions_.find(conn.id);
  if (it == sessions_.end()) {
    if (msg.type == agent::kProblemReport) return;
    throw Error("unknown-session", "no session on this connection");
  }
  auto& s = it->second;
  const auto& t = msg.type;
  const auto& body = msg.body;
  if (t == agent::kProblemReport) {
    record(s, "problem-report", "received", digest_of(msg), body);
    if (s.state == SessionState::kTermsPresented && ethics_requests_.erase(s.id)) {
      // The only predicate in the ethics request is the expiry date.
      const auto code = body.value("code", "");
      abort_session(s, code == "cannot-satisfy" ? "expired" : code, fx);
      return;
    }
    persist(s);
    return;
  }
  if (!s.thread_id.empty() && msg.thread_id != s.thread_id) throw Error("unknown-session", "message on another thread");
  if (t == "abort") {
    if (is_terminal(s.state)) return;
    s.abort_reason = body.value("reason", "aborted");
    set_state(s, SessionState::kAborted);
    record(s, "abort", "received", digest_of(msg), body);
    persist(s);
    return;
  }
  auto require = [&](SessionState st) {
    if (s.state != st) throw Error("out-of-order", t + " is not expected in " + to_string(s.state));
  };
  const auto advert = advert_for(s);

  if (t == "terms") {
    require(SessionState::kConnected);
    s.thread_id = msg.thread_id;
    const auto terms = body.value("consent_terms", "");
    const auto th = body.value("terms_hash", "");
    s.consent_terms = terms;
    if (crypto::hash(terms).hex() != th || th != advert.terms_hash || body.value("project_id", "") != advert.project_id) {
      record(s, t, "received", digest_of(msg));
      abort_session(s, "terms-mismatch", fx);
      return;
    }
    set_state(s, SessionState::kTermsPresented);
    record(s, t, "received", digest_of(msg));
  } else if (t == "ethics-offer") {
    require(SessionState::kTermsPresented);
    if (s.index_of("ethics-offer") >= 0) throw Error("out-of-order", "ethics already offered");
    record(s, t, "received", digest_of(msg));
    if (policy_.auto_accept_terms) send_ethics_request(s, fx);
  } else if (t == "ethics-presentation") {
    require(SessionState::kTermsPresented);
    auto rit = ethics_requests_.find(s.id);
    if (rit == ethics_requests_.end()) throw Error("out-of-order", "no ethics request outstanding");
    const auto p = Presentation::from_json(body);
    record(s, t, "received", digest_of(msg));
    const auto report =
        verify_ethics(p, rit->second, self.ledger().state(), nonces_,
                      {advert.project_id, advert.org_type, approved_attrs_hash(criteria_from_json(advert.criteria))});
    ethics_requests_.erase(rit);
    s.ethics_report = report.to_json();
    if (!report.accept) {
      abort_session(s, ethics_failure_reason(report), fx);
      return;
    }
    s.reward_cap = std::stoll(report.revealed.at("reward_cap"));
    set_state(s, SessionState::kEthicsVerified);
    send(s, "ethics-ack", {{"accept", true}}, fx);
  } else if (t == "eligibility-request") {
    require(SessionState::kEthicsVerified);
    if (s.index_of("eligibility-request") >= 0) throw Error("out-of-order", "eligibility already requested");
    const auto req = PresentationRequest::from_json(body);
    record(s, t, "received", digest_of(msg));
    const auto criteria = criteria_from_json(advert.criteria);
    bool within = req.purpose_id == s.project_id;
    for (const auto& rc : req.requested) {
      auto c = std::find_if(criteria.begin(), criteria.end(),
                            [&](const auto& x) { return x.cred_def_id == rc.cred_def_id; });
      if (c == criteria.end() || !rc.reveal.empty()) {
        within = false;
        continue;
      }
      for (const auto& p : rc.predicates) {
        if (std::find(c->predicates.begin(), c->predicates.end(), p) == c->predicates.end()) within = false;
      }
    }
    if (!within) {
      abort_session(s, "over-reach", fx);
      return;
    }
    s.pending = req.to_json();
    if (policy_.auto_approve_eligibility) {
      answer_eligibility(s, fx);
      return;
    }
    fx.events.push_back({{"type", "eligibility-approval-needed"}, {"session_id", s.id}});
  } else if (t == "eligibility-result") {
    require(SessionState::kEthicsVerified);
    if (s.index_of("eligibility-presentation") < 0) throw Error("out-of-order", "no eligibility presentation sent");
    record(s, t, "received", digest_of(msg));
    if (!body.value("accept", false)) {
      s.abort_reason = "ineligible";
      set_state(s, SessionState::kAborted);
      persist(s);
      return;
    }
    ResearchProject shape;
    shape.criteria = criteria_from_json(advert.criteria);
    const auto reveal = shape.reveal_set();
    s.requested.assign(reveal.begin(), reveal.end());
    set_state(s, SessionState::kEligibilityProven);
    persist(s);
    if (policy_.auto_consent) {
      consent(s.id, policy_.selection.value_or(s.requested), fx);
      return;
    }
    fx.events.push_back({{"type", "consent-needed"}, {"session_id", s.id}, {"requested", s.requested}});
  } else if (t == "consent-receipt") {
    require(SessionState::kConsented);
    if (s.index_of("consent-receipt") >= 0) throw Error("out-of-order", "receipt already received");
    const auto mine = ConsentRecord::from_json(s.consent);
    const auto theirs = ConsentRecord::from_json(body.at("consent"));
    if (theirs.signing_bytes() != mine.signing_bytes() || theirs.signature != mine.signature ||
        theirs.countersigner != conn.their_vk || !theirs.verify_countersignature()) {
      throw Error("bad-receipt", "countersignature does not cover this consent");
    }
    record(s, t, "received", digest_of(msg));
    s.consent = theirs.to_json();
    send_package(s, fx);
  } else if (t == "data-ack") {
    require(SessionState::kConsented);
    if (s.index_of("data") < 0) throw Error("out-of-order", "no data was sent");
    const auto d = crypto::Digest32::from_hex(body.at("package_digest").get<std::string>());
    const auto sig = crypto::Signature::from_hex(body.at("signature").get<std::string>());
    if (!crypto::verify(conn.their_vk, d.view(), sig)) throw Error("bad-signature", "data ack does not verify");
    record(s, t, "received", digest_of(msg));
    set_state(s, SessionState::kDataTransferred);
  } else if (t == "reward") {
    require(SessionState::kDataTransferred);
    auto held = held_from_body(body);
    if (auto why = credentials::check_held_credential(held, self.ledger().state())) throw Error("bad-reward", *why);
    const auto* cd = self.ledger().state().cred_def(held.credential.cred_def_id);
    auto values = attribute_values(held.credential);
    const auto consent = ConsentRecord::from_json(s.consent);
    if (cd->issuer_did != advert.researcher_did || values["project_id"] != s.project_id ||
        values["kind"] != "honorarium" ||
        values["session_hash"] != session_hash(s.thread_id, s.project_id, consent.signature).hex()) {
      throw Error("bad-reward", "reward is not bound to this session");
    }
    const auto amount = std::stoll(values["amount"]);
    if (s.reward_cap < 0 || amount > s.reward_cap) {
      throw Error("reward-exceeds-cap", "reward " + values["amount"] + " exceeds the certified cap");
    }
    record(s, t, "received", digest_of(msg));
    held.id = "reward-" + s.thread_id.substr(0, 16);
    auto j = held.to_json();
    j["connection_id"] = conn.id;
    self.wallet().credentials[held.id] = j;
    s.reward = {{"credential_id", held.id}, {"amount", amount}, {"project_id", s.project_id}};
    self.wallet().records["rewards"][s.id] = s.reward;
    set_state(s, SessionState::kRewarded);
    send(s, "reward-ack", json::object(), fx);
  } else {
    throw Error("unexpected-message", "owner does not handle " + t);
  }
  persist(s);
}

}  // namespace omic::exchange
