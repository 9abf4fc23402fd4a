#include "omic/credentials/credential.hpp"

#include "omic/crypto/merkle.hpp"
#include "omic/error.hpp"

namespace omic::credentials {

std::vector<crypto::Digest32> Credential::leaves() const {
  std::vector<crypto::Digest32> out;
  for (const auto& a : attributes) out.push_back(crypto::commit_attribute(a.name, a.value, a.salt).digest);
  return out;
}

json anchor_json(const crypto::ChainAnchor& a) {
  return {{"attr", a.attr_name}, {"v_max", a.v_max}, {"anchor", a.anchor.hex()}};
}

crypto::ChainAnchor anchor_from_json(const json& j) {
  return {j.at("attr").get<std::string>(), j.at("v_max").get<std::int64_t>(),
          crypto::Digest32::from_hex(j.at("anchor").get<std::string>())};
}

json Credential::to_json() const {
  json attrs = json::array();
  for (const auto& a : attributes) {
    attrs.push_back({{"name", a.name}, {"value", a.value}, {"salt", crypto::to_hex(a.salt)}});
  }
  json anc = json::array();
  for (const auto& a : anchors) anc.push_back(anchor_json(a));
  return {{"cred_def_id", cred_def_id},
          {"serial", crypto::to_hex(serial)},
          {"attributes", attrs},
          {"anchors", anc},
          {"merkle_root", merkle_root.hex()},
          {"revocation_handle", revocation_handle.hex()},
          {"issuer_signature", issuer_signature.hex()}};
}

Credential Credential::from_json(const json& j) {
  try {
    Credential c;
    c.cred_def_id = j.at("cred_def_id").get<std::string>();
    c.serial = crypto::from_hex(j.at("serial").get<std::string>());
    for (const auto& a : j.at("attributes")) {
      c.attributes.push_back({a.at("name").get<std::string>(), a.at("value").get<std::string>(),
                              crypto::salt_from_hex(a.at("salt").get<std::string>())});
    }
    for (const auto& a : j.at("anchors")) c.anchors.push_back(anchor_from_json(a));
    c.merkle_root = crypto::Digest32::from_hex(j.at("merkle_root").get<std::string>());
    c.revocation_handle = crypto::Digest32::from_hex(j.at("revocation_handle").get<std::string>());
    c.issuer_signature = crypto::Signature::from_hex(j.at("issuer_signature").get<std::string>());
    return c;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("credential: ") + e.what());
  }
}

json HeldCredential::to_json() const {
  json tokens = json::object();
  for (const auto& [k, v] : holder_tokens) tokens[k] = v.hex();
  return {{"id", id}, {"credential", credential.to_json()}, {"holder_tokens", tokens}, {"encoded", encoded}};
}

HeldCredential HeldCredential::from_json(const json& j) {
  try {
    HeldCredential h;
    h.id = j.at("id").get<std::string>();
    h.credential = Credential::from_json(j.at("credential"));
    for (const auto& [k, v] : j.at("holder_tokens").items()) {
      h.holder_tokens[k] = crypto::Digest32::from_hex(v.get<std::string>());
    }
    h.encoded = j.at("encoded").get<std::map<std::string, std::int64_t>>();
    return h;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("held credential: ") + e.what());
  }
}

crypto::Digest32 revocation_handle_for(crypto::ByteView serial) { return crypto::hash_tagged("revoc", {serial}); }

std::string issuer_signing_bytes(const std::string& cred_def_id, const crypto::Digest32& merkle_root,
                                 const std::vector<crypto::ChainAnchor>& anchors,
                                 const crypto::Digest32& revocation_handle) {
  json anc = json::array();
  for (const auto& a : anchors) anc.push_back(anchor_json(a));
  return json{{"anchors", anc},
              {"cred_def_id", cred_def_id},
              {"merkle_root", merkle_root.hex()},
              {"revocation_handle", revocation_handle.hex()}}
      .dump();
}

HeldCredential issue_credential(const crypto::KeyPair& issuer_key, const std::string& cred_def_id,
                                const ledger::SchemaRecord& schema, const json& values, crypto::Drbg& rng) {
  if (!values.is_object()) throw Error("bad-value", "values must be an object");
  for (const auto& [k, v] : values.items()) find_attribute(schema, k);
  HeldCredential held;
  auto& c = held.credential;
  c.cred_def_id = cred_def_id;
  c.serial = rng.bytes(16);
  for (const auto& spec : schema.attributes) {
    if (!values.contains(spec.name)) throw Error("missing-attribute", "no value for " + spec.name);
    const auto cv = canonicalize(spec, values.at(spec.name));
    CredentialAttribute attr{spec.name, cv.text, {}};
    const auto salt = rng.bytes(16);
    std::copy(salt.begin(), salt.end(), attr.salt.begin());
    c.attributes.push_back(attr);
    if (cv.encoded) {
      auto issued = crypto::chain_issue(rng.digest(), spec.name, *cv.encoded, spec.v_max);
      c.anchors.push_back(issued.anchor);
      held.holder_tokens[spec.name] = issued.holder_token;
      held.encoded[spec.name] = *cv.encoded;
    }
  }
  c.merkle_root = crypto::merkle_root(c.leaves());
  c.revocation_handle = revocation_handle_for(c.serial);
  c.issuer_signature =
      issuer_key.sign(crypto::as_bytes(issuer_signing_bytes(cred_def_id, c.merkle_root, c.anchors, c.revocation_handle)));
  held.id = crypto::to_hex(crypto::hash_tagged("credid", {c.serial}).view()).substr(0, 16);
  return held;
}

std::optional<std::string> check_held_credential(const HeldCredential& held, const ledger::LedgerState& state) {
  const auto& c = held.credential;
  const auto* cd = state.cred_def(c.cred_def_id);
  if (!cd) return "credential definition " + c.cred_def_id + " is not on the ledger";
  const auto* nym = state.nym(cd->issuer_did);
  if (!nym || nym->verkey != cd->verkey) return "issuer DID is not registered with the cred-def key";
  const auto* schema = state.schema(cd->schema_id);
  if (!schema) return "schema missing from the ledger";
  if (!crypto::verify(cd->verkey,
                      crypto::as_bytes(issuer_signing_bytes(c.cred_def_id, c.merkle_root, c.anchors, c.revocation_handle)),
                      c.issuer_signature)) {
    return "issuer signature does not verify under the ledger key";
  }
  if (c.attributes.size() != schema->attributes.size()) return "attribute count differs from the schema";
  for (std::size_t i = 0; i < c.attributes.size(); ++i) {
    if (c.attributes[i].name != schema->attributes[i].name) return "attributes out of schema order";
  }
  if (crypto::merkle_root(c.leaves()) != c.merkle_root) return "commitments do not reproduce the root";
  if (revocation_handle_for(c.serial) != c.revocation_handle) return "revocation handle does not match serial";
  if (c.anchors.size() != cd->chains.size()) return "anchor count differs from the cred-def";
  for (std::size_t i = 0; i < c.anchors.size(); ++i) {
    const auto& a = c.anchors[i];
    if (a.attr_name != cd->chains[i].first || a.v_max != cd->chains[i].second) return "anchor parameters differ";
    auto tok = held.holder_tokens.find(a.attr_name);
    auto enc = held.encoded.find(a.attr_name);
    if (tok == held.holder_tokens.end() || enc == held.encoded.end()) return "missing token for " + a.attr_name;
    if (enc->second < 0 || enc->second > a.v_max || crypto::hash_iterate(tok->second, enc->second) != a.anchor) {
      return "token for " + a.attr_name + " does not reach its anchor";
    }
    for (const auto& attr : c.attributes) {
      if (attr.name == a.attr_name &&
          attr.value != render_encoded(enc->second, find_attribute(*schema, a.attr_name).precision)) {
        return "encoded value differs from committed text for " + a.attr_name;
      }
    }
  }
  return std::nullopt;
}

}  // namespace omic::credentials
