#include "omic/ledger/builders.hpp"

#include "omic/crypto/did.hpp"

namespace omic::ledger {

Transaction make_nym(const crypto::KeyPair& key, const std::string& role, crypto::Drbg& rng) {
  const auto did = crypto::did_from_verkey(key.verification_key());
  return make_transaction(TxKind::kNym, did,
                          {{"did", did}, {"verkey", key.verification_key().base58()}, {"role", role}},
                          rng.bytes(16), key);
}

Transaction make_schema(const crypto::KeyPair& key, const std::string& name, const std::string& version,
                        const std::vector<AttributeSpec>& attributes, crypto::Drbg& rng) {
  const auto did = crypto::did_from_verkey(key.verification_key());
  json attrs = json::array();
  for (const auto& a : attributes) {
    attrs.push_back({{"name", a.name}, {"type", a.type}, {"precision", a.precision}, {"v_max", a.v_max}});
  }
  return make_transaction(TxKind::kSchema, did,
                          {{"id", did + ":" + name + ":" + version},
                           {"name", name},
                           {"version", version},
                           {"attributes", attrs}},
                          rng.bytes(16), key);
}

std::string cred_def_id_for(const std::string& issuer_did, const std::string& schema_name, const std::string& tag) {
  return issuer_did + ":creddef:" + schema_name + ":" + tag;
}

std::string registry_id_for(const std::string& cred_def_id) { return cred_def_id + ":revoc"; }

Transaction make_cred_def(const crypto::KeyPair& key, const std::string& tag, const SchemaRecord& schema,
                          crypto::Drbg& rng) {
  const auto did = crypto::did_from_verkey(key.verification_key());
  const auto id = cred_def_id_for(did, schema.name, tag);
  json chains = json::array();
  for (const auto& a : schema.attributes) {
    if (a.type == "int") chains.push_back({{"attr", a.name}, {"v_max", a.v_max}});
  }
  return make_transaction(TxKind::kCredDef, did,
                          {{"id", id},
                           {"schema_id", schema.id},
                           {"issuer_did", did},
                           {"verkey", key.verification_key().base58()},
                           {"revoc_reg_id", registry_id_for(id)},
                           {"chains", chains}},
                          rng.bytes(16), key);
}

Transaction make_revoc_reg_def(const crypto::KeyPair& key, const std::string& cred_def_id,
                               const std::string& registry_id, crypto::Drbg& rng) {
  return make_transaction(TxKind::kRevocRegDef, crypto::did_from_verkey(key.verification_key()),
                          {{"id", registry_id}, {"cred_def_id", cred_def_id}}, rng.bytes(16), key);
}

Transaction make_revoc_entry(const crypto::KeyPair& key, const std::string& registry_id,
                             const std::vector<crypto::Digest32>& handles, crypto::Drbg& rng) {
  json hs = json::array();
  for (const auto& h : handles) hs.push_back(h.hex());
  return make_transaction(TxKind::kRevocRegEntry, crypto::did_from_verkey(key.verification_key()),
                          {{"revoc_reg_id", registry_id}, {"handles", hs}}, rng.bytes(16), key);
}

}  // namespace omic::ledger
