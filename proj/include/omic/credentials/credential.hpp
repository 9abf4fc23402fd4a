#pragma once

#include <map>

#include "omic/credentials/schema.hpp"
#include "omic/crypto/commitment.hpp"
#include "omic/crypto/hash_chain.hpp"

namespace omic::credentials {

struct CredentialAttribute {
  std::string name;
  std::string value;  // canonical text
  crypto::Salt salt{};
};

struct Credential {
  std::string cred_def_id;
  crypto::Bytes serial;                          // 16 random bytes
  std::vector<CredentialAttribute> attributes;  // schema order
  std::vector<crypto::ChainAnchor> anchors;     // int attributes, schema order
  crypto::Digest32 merkle_root;
  crypto::Digest32 revocation_handle;           // H("revoc" || serial)
  crypto::Signature issuer_signature;

  std::vector<crypto::Digest32> leaves() const;
  json to_json() const;
  static Credential from_json(const json& j);
};

// What the holder keeps next to the credential: the chain tokens for int
// attributes (never transmitted again) and their integer encodings.
struct HeldCredential {
  std::string id;
  Credential credential;
  std::map<std::string, crypto::Digest32> holder_tokens;
  std::map<std::string, std::int64_t> encoded;

  json to_json() const;
  static HeldCredential from_json(const json& j);
};

crypto::Digest32 revocation_handle_for(crypto::ByteView serial);

// The issuer signs the public parts only: cred-def id, commitment root,
// chain anchors and revocation handle. The serial stays with issuer and
// holder; the handle commits to it.
std::string issuer_signing_bytes(const std::string& cred_def_id, const crypto::Digest32& merkle_root,
                                 const std::vector<crypto::ChainAnchor>& anchors,
                                 const crypto::Digest32& revocation_handle);

json anchor_json(const crypto::ChainAnchor& a);
crypto::ChainAnchor anchor_from_json(const json& j);

// Builds and signs a credential. `values` maps every schema attribute to a
// raw value. Throws omic::Error("missing-attribute"), ("unknown-attribute"),
// ("bad-value") or ("out-of-range").
HeldCredential issue_credential(const crypto::KeyPair& issuer_key, const std::string& cred_def_id,
                                const ledger::SchemaRecord& schema, const json& values, crypto::Drbg& rng);

// Holder-side acceptance: issuer NYM and CRED_DEF on the ledger, signature
// under the registered key, commitments and root recompute, every token
// hashes forward to its anchor. Returns the first problem, if any.
std::optional<std::string> check_held_credential(const HeldCredential& held, const ledger::LedgerState& state);

}  // namespace omic::credentials
