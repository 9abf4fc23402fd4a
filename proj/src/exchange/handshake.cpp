#include "omic/exchange/handshake.hpp"

#include <algorithm>

#include "omic/error.hpp"
#include "omic/ledger/transaction.hpp"

namespace omic::exchange {

namespace {

const std::vector<std::pair<SessionState, std::string>> kStateNames = {
    {SessionState::kAdvertSeen, "ADVERT_SEEN"},
    {SessionState::kConnected, "CONNECTED"},
    {SessionState::kTermsPresented, "TERMS_PRESENTED"},
    {SessionState::kEthicsVerified, "ETHICS_VERIFIED"},
    {SessionState::kEligibilityProven, "ELIGIBILITY_PROVEN"},
    {SessionState::kConsented, "CONSENTED"},
    {SessionState::kDataTransferred, "DATA_TRANSFERRED"},
    {SessionState::kRewarded, "REWARDED"},
    {SessionState::kAborted, "ABORTED"},
};

}  // namespace

std::string to_string(SessionState s) {
  for (const auto& [k, v] : kStateNames) {
    if (k == s) return v;
  }
  return "ABORTED";
}

SessionState session_state_from_string(const std::string& s) {
  for (const auto& [k, v] : kStateNames) {
    if (v == s) return k;
  }
  throw Error("malformed", "unknown session state " + s);
}

bool is_terminal(SessionState s) { return s == SessionState::kRewarded || s == SessionState::kAborted; }

json TranscriptEntry::to_json() const {
  return {{"seq", seq}, {"event", event}, {"direction", direction}, {"state", state}, {"digest", digest},
          {"detail", detail}};
}

std::string ConsentRecord::signing_bytes() const {
  return ledger::canonical({{"session_id", session_id},
                            {"project_id", project_id},
                            {"terms_hash", terms_hash},
                            {"purpose_id", purpose_id},
                            {"selected", selected},
                            {"timestamp", timestamp},
                            {"signer", signer.base58()}});
}

bool ConsentRecord::verify() const { return crypto::verify(signer, crypto::as_bytes(signing_bytes()), signature); }

bool ConsentRecord::verify_countersignature() const {
  return countersigner && countersignature &&
         crypto::verify(*countersigner, crypto::as_bytes(signing_bytes()), *countersignature);
}

json ConsentRecord::to_json() const {
  auto j = json::parse(signing_bytes());
  j["signature"] = signature.hex();
  if (countersigner) j["countersigner"] = countersigner->base58();
  if (countersignature) j["countersignature"] = countersignature->hex();
  return j;
}

ConsentRecord ConsentRecord::from_json(const json& j) {
  try {
    ConsentRecord c;
    c.session_id = j.at("session_id").get<std::string>();
    c.project_id = j.at("project_id").get<std::string>();
    c.terms_hash = j.at("terms_hash").get<std::string>();
    c.purpose_id = j.at("purpose_id").get<std::string>();
    c.selected = j.at("selected").get<std::vector<std::string>>();
    c.timestamp = j.at("timestamp").get<std::int64_t>();
    c.signer = crypto::VerificationKey::from_base58(j.at("signer").get<std::string>());
    c.signature = crypto::Signature::from_hex(j.at("signature").get<std::string>());
    if (j.contains("countersigner")) {
      c.countersigner = crypto::VerificationKey::from_base58(j["countersigner"].get<std::string>());
    }
    if (j.contains("countersignature")) {
      c.countersignature = crypto::Signature::from_hex(j["countersignature"].get<std::string>());
    }
    return c;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("consent: ") + e.what());
  }
}

ConsentRecord sign_consent(const crypto::KeyPair& key, std::string session_id, std::string project_id,
                           std::string terms_hash, std::string purpose_id, std::vector<std::string> selected,
                           std::int64_t timestamp) {
  ConsentRecord c;
  c.session_id = std::move(session_id);
  c.project_id = std::move(project_id);
  c.terms_hash = std::move(terms_hash);
  c.purpose_id = std::move(purpose_id);
  c.selected = std::move(selected);
  c.timestamp = timestamp;
  c.signer = key.verification_key();
  c.signature = key.sign(crypto::as_bytes(c.signing_bytes()));
  return c;
}

crypto::Digest32 consent_digest(const ConsentRecord& c) {
  return crypto::hash_tagged("consent", {crypto::as_bytes(c.signing_bytes()), c.signature.view()});
}

json DataPackage::to_json() const {
  return {{"purpose_id", purpose_id},
          {"terms_hash", terms_hash},
          {"consent_digest", consent_digest},
          {"presentation", presentation.to_json()}};
}

DataPackage DataPackage::from_json(const json& j) {
  try {
    return {j.at("purpose_id").get<std::string>(), j.at("terms_hash").get<std::string>(),
            j.at("consent_digest").get<std::string>(), credentials::Presentation::from_json(j.at("presentation"))};
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("data package: ") + e.what());
  }
}

credentials::PresentationRequest package_request(const ConsentRecord& consent,
                                                 const std::vector<credentials::RequestedCredential>& criteria,
                                                 const std::string& purpose_id) {
  credentials::PresentationRequest req;
  const auto d = consent_digest(consent);
  req.nonce = crypto::Bytes(d.bytes.begin(), d.bytes.begin() + 16);
  req.purpose_id = purpose_id;
  for (const auto& c : criteria) {
    credentials::RequestedCredential rc{c.cred_def_id, {}, {}};
    for (const auto& name : c.reveal) {
      if (std::find(consent.selected.begin(), consent.selected.end(), name) != consent.selected.end()) {
        rc.reveal.push_back(name);
      }
    }
    req.requested.push_back(std::move(rc));
  }
  return req;
}

credentials::VerificationReport verify_data_package(const DataPackage& pkg, const ConsentRecord& consent,
                                                    const std::vector<credentials::RequestedCredential>& criteria,
                                                    const std::string& purpose_id,
                                                    const ledger::LedgerState& state) {
  const auto req = package_request(consent, criteria, purpose_id);
  credentials::NonceBook nonces;
  nonces.issue(req.nonce);
  auto report = credentials::verify_presentation(pkg.presentation, req, state, nonces);
  auto add = [&](const std::string& check, bool ok, const std::string& good, const std::string& bad) {
    report.trace.push_back({check, ok, ok ? good : bad});
    if (!ok) report.accept = false;
  };
  add("consent", pkg.consent_digest == consent_digest(consent).hex() && pkg.terms_hash == consent.terms_hash,
      "The package names the signed consent and its terms.", "The package does not match the signed consent.");
  add("purpose", pkg.purpose_id == purpose_id && consent.purpose_id == purpose_id,
      "The data is used for the purpose the owner consented to.",
      "The data is being checked for a purpose the owner did not consent to.");
  if (!report.accept) report.revealed.clear();
  return report;
}

crypto::Digest32 session_hash(const std::string& session_id, const std::string& project_id,
                              const crypto::Signature& consent_signature) {
  return crypto::hash_tagged("session",
                             {crypto::as_bytes(session_id), crypto::as_bytes("|"), crypto::as_bytes(project_id),
                              crypto::as_bytes("|"), consent_signature.view()});
}

std::vector<ledger::AttributeSpec> reward_schema_attributes() {
  return {{"project_id", "string", 0, 0},
          {"amount", "int", 0, 1000},
          {"kind", "string", 0, 0},
          {"session_hash", "string", 0, 0}};
}

std::int64_t HandshakeSession::index_of(const std::string& event) const {
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    if (transcript[i].event == event) return static_cast<std::int64_t>(i);
  }
  return -1;
}

json HandshakeSession::to_json() const {
  json t = json::array();
  for (const auto& e : transcript) t.push_back(e.to_json());
  return {{"id", id},
          {"role", role},
          {"state", to_string(state)},
          {"project_id", project_id},
          {"advert_id", advert_id},
          {"connection_id", connection_id},
          {"thread_id", thread_id},
          {"abort_reason", abort_reason},
          {"consent_terms", consent_terms},
          {"requested", requested},
          {"selected", selected},
          {"reward_cap", reward_cap},
          {"ethics_report", ethics_report},
          {"eligibility_report", eligibility_report},
          {"data_report", data_report},
          {"consent", consent},
          {"reward", reward},
          {"pending", pending},
          {"transcript", t}};
}

HandshakeSession HandshakeSession::from_json(const json& j) {
  try {
    HandshakeSession s;
    s.id = j.at("id").get<std::string>();
    s.role = j.at("role").get<std::string>();
    s.state = session_state_from_string(j.at("state").get<std::string>());
    s.project_id = j.value("project_id", "");
    s.advert_id = j.value("advert_id", "");
    s.connection_id = j.value("connection_id", "");
    s.thread_id = j.value("thread_id", "");
    s.abort_reason = j.value("abort_reason", "");
    s.consent_terms = j.value("consent_terms", "");
    s.requested = j.value("requested", std::vector<std::string>{});
    s.selected = j.value("selected", std::vector<std::string>{});
    s.reward_cap = j.value("reward_cap", std::int64_t{-1});
    s.ethics_report = j.value("ethics_report", json());
    s.eligibility_report = j.value("eligibility_report", json());
    s.data_report = j.value("data_report", json());
    s.consent = j.value("consent", json());
    s.reward = j.value("reward", json());
    s.pending = j.value("pending", json());
    for (const auto& e : j.at("transcript")) {
      s.transcript.push_back({e.at("seq").get<std::int64_t>(), e.at("event").get<std::string>(),
                              e.at("direction").get<std::string>(), e.at("state").get<std::string>(),
                              e.at("digest").get<std::string>(), e.value("detail", json())});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("session: ") + e.what());
  }
}

}  // namespace omic::exchange
