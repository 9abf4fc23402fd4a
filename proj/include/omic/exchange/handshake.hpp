#pragma once

#include "omic/exchange/project.hpp"

namespace omic::exchange {

enum class SessionState {
  kAdvertSeen,
  kConnected,
  kTermsPresented,
  kEthicsVerified,
  kEligibilityProven,
  kConsented,
  kDataTransferred,
  kRewarded,
  kAborted,
};

std::string to_string(SessionState s);
SessionState session_state_from_string(const std::string& s);
bool is_terminal(SessionState s);

struct TranscriptEntry {
  std::int64_t seq = 0;
  std::string event;      // message type, or "connect" / "abort" / "problem-report"
  std::string direction;  // sent | received | local
  std::string state;      // state after the event
  std::string digest;     // hash of the message's canonical form, empty for local events
  json detail = nullptr;

  json to_json() const;
};

// Owner's signed agreement; the researcher countersigns the same bytes.
struct ConsentRecord {
  std::string session_id;  // handshake thread
  std::string project_id;
  std::string terms_hash;
  std::string purpose_id;
  std::vector<std::string> selected;
  std::int64_t timestamp = 0;
  crypto::VerificationKey signer;
  crypto::Signature signature;
  std::optional<crypto::VerificationKey> countersigner;
  std::optional<crypto::Signature> countersignature;

  std::string signing_bytes() const;
  bool verify() const;
  bool verify_countersignature() const;
  json to_json() const;
  static ConsentRecord from_json(const json& j);
};

ConsentRecord sign_consent(const crypto::KeyPair& key, std::string session_id, std::string project_id,
                           std::string terms_hash, std::string purpose_id, std::vector<std::string> selected,
                           std::int64_t timestamp);

// Consent-bound payload: the selected openings as a presentation whose
// request is derived from the consent record.
struct DataPackage {
  std::string purpose_id;
  std::string terms_hash;
  std::string consent_digest;
  credentials::Presentation presentation;

  json to_json() const;
  static DataPackage from_json(const json& j);
};

crypto::Digest32 consent_digest(const ConsentRecord& c);

// The request a data package answers: the nonce comes from the consent
// digest, every criteria credential reveals the consented subset of its
// reveal list in criteria order, no predicates.
credentials::PresentationRequest package_request(const ConsentRecord& consent,
                                                 const std::vector<credentials::RequestedCredential>& criteria,
                                                 const std::string& purpose_id);

// Verifies a package against the consent it claims to honour, under the
// purpose the caller intends to use the data for.
credentials::VerificationReport verify_data_package(const DataPackage& pkg, const ConsentRecord& consent,
                                                    const std::vector<credentials::RequestedCredential>& criteria,
                                                    const std::string& purpose_id,
                                                    const ledger::LedgerState& state);

// Binds a reward to one session.
crypto::Digest32 session_hash(const std::string& session_id, const std::string& project_id,
                              const crypto::Signature& consent_signature);

// {project_id, amount, kind, session_hash}
std::vector<ledger::AttributeSpec> reward_schema_attributes();

struct HandshakeSession {
  std::string id;
  std::string role;  // owner | researcher
  SessionState state = SessionState::kAdvertSeen;
  std::string project_id;
  std::string advert_id;
  std::string connection_id;
  std::string thread_id;
  std::string abort_reason;
  std::string consent_terms;
  std::vector<std::string> requested;  // reveal set offered for consent
  std::vector<std::string> selected;
  std::int64_t reward_cap = -1;
  json ethics_report = nullptr;
  json eligibility_report = nullptr;
  json data_report = nullptr;
  json consent = nullptr;
  json reward = nullptr;
  json pending = nullptr;  // owner: eligibility request awaiting approval
  std::vector<TranscriptEntry> transcript;

  std::int64_t index_of(const std::string& event) const;  // -1 when absent
  json to_json() const;
  static HandshakeSession from_json(const json& j);
};

}  // namespace omic::exchange
