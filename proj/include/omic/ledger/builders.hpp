#pragma once

#include "omic/crypto/drbg.hpp"
#include "omic/ledger/state.hpp"

namespace omic::ledger {

// Signed transaction builders. Nonces come from `rng`.
Transaction make_nym(const crypto::KeyPair& key, const std::string& role, crypto::Drbg& rng);
Transaction make_schema(const crypto::KeyPair& key, const std::string& name, const std::string& version,
                        const std::vector<AttributeSpec>& attributes, crypto::Drbg& rng);
Transaction make_cred_def(const crypto::KeyPair& key, const std::string& tag, const SchemaRecord& schema,
                          crypto::Drbg& rng);
Transaction make_revoc_reg_def(const crypto::KeyPair& key, const std::string& cred_def_id,
                               const std::string& registry_id, crypto::Drbg& rng);
Transaction make_revoc_entry(const crypto::KeyPair& key, const std::string& registry_id,
                             const std::vector<crypto::Digest32>& handles, crypto::Drbg& rng);

// Id conventions used by make_cred_def.
std::string cred_def_id_for(const std::string& issuer_did, const std::string& schema_name, const std::string& tag);
std::string registry_id_for(const std::string& cred_def_id);

}  // namespace omic::ledger
