#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

#include "omic/crypto/digest.hpp"
#include "omic/crypto/signature.hpp"

namespace omic::ledger {

using json = nlohmann::json;

// The only record kinds the ledger accepts: public DIDs, schemas, credential
// definitions and revocation registries.
enum class TxKind { kNym, kSchema, kCredDef, kRevocRegDef, kRevocRegEntry };

std::string to_string(TxKind kind);
// Throws omic::Error("unknown-kind").
TxKind tx_kind_from_string(std::string_view s);

struct Transaction {
  TxKind kind = TxKind::kNym;
  std::string author_did;
  json payload = json::object();
  crypto::Bytes nonce;  // 16 bytes
  crypto::Signature author_signature;

  json to_json() const;
  // Throws omic::Error("unknown-kind") or ("malformed").
  static Transaction from_json(const json& j);

  // Canonical JSON of every field except the signature.
  std::string signing_bytes() const;
  crypto::Digest32 digest() const;
  // author_did + ":" + hex(nonce); the replay-protection key.
  std::string replay_key() const;
};

Transaction make_transaction(TxKind kind, std::string author_did, json payload,
                             crypto::Bytes nonce, const crypto::KeyPair& author_key);

struct Rejection {
  std::string code;  // e.g. "bad-signature", "duplicate", "disallowed-field"
  std::string detail;
};

// Sorted keys, no whitespace.
std::string canonical(const json& j);

}  // namespace omic::ledger
