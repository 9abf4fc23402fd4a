#include "omic/ledger/transaction.hpp"

#include <array>

#include "omic/error.hpp"

namespace omic::ledger {

namespace {

constexpr std::array<std::pair<TxKind, std::string_view>, 5> kKindNames{{
    {TxKind::kNym, "NYM"},
    {TxKind::kSchema, "SCHEMA"},
    {TxKind::kCredDef, "CRED_DEF"},
    {TxKind::kRevocRegDef, "REVOC_REG_DEF"},
    {TxKind::kRevocRegEntry, "REVOC_REG_ENTRY"},
}};

}  // namespace

std::string canonical(const json& j) { return j.dump(); }

std::string to_string(TxKind kind) {
  for (auto [k, name] : kKindNames) {
    if (k == kind) return std::string(name);
  }
  return "?";
}

TxKind tx_kind_from_string(std::string_view s) {
  for (auto [k, name] : kKindNames) {
    if (name == s) return k;
  }
  throw Error("unknown-kind", "unknown transaction kind '" + std::string(s) + "'");
}

json Transaction::to_json() const {
  return {{"kind", to_string(kind)},
          {"author_did", author_did},
          {"payload", payload},
          {"nonce", crypto::to_hex(nonce)},
          {"signature", author_signature.hex()}};
}

Transaction Transaction::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error("malformed", "transaction must be an object with a kind");
  }
  Transaction tx;
  tx.kind = tx_kind_from_string(j["kind"].get<std::string>());
  try {
    if (j.size() != 5) throw Error("malformed", "unexpected transaction fields");
    tx.author_did = j.at("author_did").get<std::string>();
    tx.payload = j.at("payload");
    if (!tx.payload.is_object()) throw Error("malformed", "payload must be an object");
    tx.nonce = crypto::from_hex(j.at("nonce").get<std::string>());
    if (tx.nonce.size() != 16) throw Error("malformed", "nonce must be 16 bytes");
    tx.author_signature = crypto::Signature::from_hex(j.at("signature").get<std::string>());
  } catch (const json::exception& e) {
    throw Error("malformed", e.what());
  } catch (const Error& e) {
    throw Error("malformed", e.what());
  }
  return tx;
}

std::string Transaction::signing_bytes() const {
  json j = to_json();
  j.erase("signature");
  return canonical(j);
}

crypto::Digest32 Transaction::digest() const {
  return crypto::hash_tagged("tx", {crypto::as_bytes(canonical(to_json()))});
}

std::string Transaction::replay_key() const { return author_did + ":" + crypto::to_hex(nonce); }

Transaction make_transaction(TxKind kind, std::string author_did, json payload,
                             crypto::Bytes nonce, const crypto::KeyPair& author_key) {
  Transaction tx;
  tx.kind = kind;
  tx.author_did = std::move(author_did);
  tx.payload = std::move(payload);
  tx.nonce = std::move(nonce);
  tx.author_signature = author_key.sign(crypto::as_bytes(tx.signing_bytes()));
  return tx;
}

}  // namespace omic::ledger
