#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "omic/ledger/block.hpp"

namespace omic::ledger {

struct AttributeSpec {
  std::string name;
  std::string type;  // "string" | "int"
  int precision = 0;
  std::int64_t v_max = 0;
  bool operator==(const AttributeSpec&) const = default;
};

struct NymRecord {
  std::string did;
  crypto::VerificationKey verkey;
  std::string role;
  std::int64_t height = 0;
};

struct SchemaRecord {
  std::string id;  // issuer_did:name:version
  std::string issuer_did;
  std::string name;
  std::string version;
  std::vector<AttributeSpec> attributes;
  std::int64_t height = 0;
};

struct CredDefRecord {
  std::string id;
  std::string schema_id;
  std::string issuer_did;
  crypto::VerificationKey verkey;
  std::string revoc_reg_id;
  std::vector<std::pair<std::string, std::int64_t>> chains;  // attr -> v_max
  std::int64_t height = 0;
};

struct RevocationRegistry {
  std::string id;
  std::string cred_def_id;
  std::string issuer_did;
  std::map<crypto::Digest32, std::int64_t> revoked;  // handle -> height revoked
  std::int64_t height = 0;
};

// Role labels a NYM may carry.
inline const std::set<std::string> kNymRoles = {"issuer", "endorser", "researcher", "steward"};

// Query keys.
struct NymKey { std::string did; };
struct SchemaKey { std::string id; };
struct CredDefKey { std::string id; };
struct RevokedKey { std::string registry_id; crypto::Digest32 handle; };
using QueryKey = std::variant<NymKey, SchemaKey, CredDefKey, RevokedKey>;

struct QueryResult {
  bool found = false;
  json entry;                 // the record, or {"revoked": bool}
  std::int64_t height = 0;    // ledger height the answer is valid at
};

class LedgerState {
 public:
  std::optional<Rejection> validate(const Transaction& tx) const;
  // Precondition: validate(tx) returned nullopt.
  void apply(const Transaction& tx, std::int64_t height);

  // Throws omic::Error("unknown-registry") for revoked? on an unknown registry.
  QueryResult query(const QueryKey& key) const;
  QueryResult query(const QueryKey& key, std::int64_t at_height) const;

  const NymRecord* nym(const std::string& did) const;
  const SchemaRecord* schema(const std::string& id) const;
  const CredDefRecord* cred_def(const std::string& id) const;
  const RevocationRegistry* registry(const std::string& id) const;
  bool is_revoked(const std::string& registry_id, const crypto::Digest32& handle,
                  std::int64_t at_height) const;

  std::int64_t height() const { return height_; }
  const crypto::Digest32& tip_hash() const { return tip_hash_; }

  json to_json() const;
  crypto::Digest32 digest() const;

  // Only block application moves these.
  void set_tip(std::int64_t height, const crypto::Digest32& hash) {
    height_ = height;
    tip_hash_ = hash;
  }

 private:
  std::map<std::string, NymRecord> nyms_;
  std::map<std::string, SchemaRecord> schemas_;
  std::map<std::string, CredDefRecord> cred_defs_;
  std::map<std::string, RevocationRegistry> registries_;
  std::set<std::string> seen_nonces_;
  std::int64_t height_ = -1;
  crypto::Digest32 tip_hash_;
};

// Free-function entry point, also handles unparseable / unknown-kind input.
std::optional<Rejection> validate_transaction(const json& raw, const LedgerState& state);

// Applies a certified block to a copy of state. Genesis (height 0) is
// accepted without a certificate. Throws omic::Error with code
// "bad-height", "bad-prev-hash", "bad-tx-root", "bad-proposer",
// "bad-certificate" or "invalid-tx".
LedgerState apply_block(const LedgerState& state, const Block& block,
                        const std::vector<ValidatorInfo>& validators);

}  // namespace omic::ledger
