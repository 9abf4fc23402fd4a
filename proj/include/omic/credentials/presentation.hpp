#pragma once

#include <set>

#include "omic/credentials/credential.hpp"
#include "omic/crypto/merkle.hpp"

namespace omic::credentials {

struct PredicateSpec {
  std::string attr;
  std::int64_t threshold = 0;  // integer encoding; the predicate is value >= threshold
  bool operator==(const PredicateSpec&) const = default;
};

struct RequestedCredential {
  std::string cred_def_id;
  std::vector<std::string> reveal;
  std::vector<PredicateSpec> predicates;
};

struct PresentationRequest {
  crypto::Bytes nonce;  // 16 bytes, single use per verifier
  std::vector<RequestedCredential> requested;
  std::string purpose_id;

  json to_json() const;
  static PresentationRequest from_json(const json& j);
};

PresentationRequest make_request(std::vector<RequestedCredential> requested, std::string purpose_id,
                                 crypto::Drbg& rng);

struct RevealedAttribute {
  std::string name;
  std::string value;
  crypto::Salt salt{};
  crypto::MerklePath path;
};

struct PredicateProof {
  std::string attr;
  std::int64_t threshold = 0;
  crypto::Digest32 proof;
};

struct PresentedCredential {
  std::string cred_def_id;
  crypto::Digest32 merkle_root;
  std::vector<crypto::ChainAnchor> anchors;
  crypto::Digest32 revocation_handle;
  crypto::Signature issuer_signature;
  std::int64_t ledger_height = 0;
  std::vector<RevealedAttribute> revealed;
  std::vector<PredicateProof> predicates;
};

struct Presentation {
  crypto::Bytes nonce;
  std::string purpose_id;
  std::vector<PresentedCredential> credentials;
  crypto::VerificationKey binding_key;  // fresh per presentation
  crypto::Signature binding_signature;

  // Canonical JSON of every field except the binding signature.
  std::string body_bytes() const;
  json to_json() const;
  static Presentation from_json(const json& j);
};

// Reveals exactly the requested attributes and proves the predicates from
// holder tokens. Throws omic::Error("not-held") when no credential matches a
// requested cred-def, ("cannot-satisfy") when a predicate is false for the
// held value, ("unknown-attribute") for names outside the credential.
Presentation create_presentation(std::span<const HeldCredential> wallet, const PresentationRequest& request,
                                 std::int64_t ledger_height, crypto::Drbg& rng);

struct TraceLine {
  std::string check;  // nonce, request, issuer, signature, disclosure, predicate, revocation, binding
  bool ok = false;
  std::string explanation;
};

struct VerificationReport {
  bool accept = false;
  std::vector<TraceLine> trace;
  // Convenience: the revealed values of every accepted disclosure.
  std::map<std::string, std::string> revealed;

  json to_json() const;
  std::string first_failure() const;  // check name, empty when accepted
};

// Verifier-side nonce bookkeeping: outstanding requests and spent nonces.
class NonceBook {
 public:
  void issue(const crypto::Bytes& nonce) { outstanding_.insert(crypto::to_hex(nonce)); }
  bool outstanding(const crypto::Bytes& nonce) const { return outstanding_.count(crypto::to_hex(nonce)) > 0; }
  // Moves the nonce from outstanding to spent. False if it was not outstanding.
  bool spend(const crypto::Bytes& nonce);

 private:
  std::set<std::string> outstanding_;
  std::set<std::string> spent_;
};

// Checks, in order: nonce freshness, match with the request, issuer NYM and
// CRED_DEF lookup, issuer signature, every disclosure, every predicate,
// revocation at the verifier's current height, holder binding. Never throws;
// every failure is a trace line. Spends the nonce.
VerificationReport verify_presentation(const Presentation& p, const PresentationRequest& request,
                                       const ledger::LedgerState& ledger, NonceBook& nonces);

}  // namespace omic::credentials
