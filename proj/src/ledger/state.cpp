#include "omic/ledger/state.hpp"

#include "omic/crypto/did.hpp"
#include "omic/crypto/hash_chain.hpp"
#include "omic/error.hpp"
#include "omic/ledger/consensus.hpp"

namespace omic::ledger {

namespace {

Rejection reject(std::string code, std::string detail) { return {std::move(code), std::move(detail)}; }

// Payloads are checked against an exact field whitelist. Nothing that could
// hold an attribute value (or anything else unexpected) gets through.
std::optional<Rejection> check_fields(const json& obj, std::initializer_list<std::string_view> allowed,
                                      std::string_view what) {
  if (!obj.is_object()) return reject("malformed", std::string(what) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) return reject("disallowed-field", std::string(what) + " carries field '" + key + "'");
  }
  for (auto a : allowed) {
    if (!obj.contains(std::string(a))) {
      return reject("malformed", std::string(what) + " missing field '" + std::string(a) + "'");
    }
  }
  return std::nullopt;
}

bool is_string(const json& j, const char* k) { return j.contains(k) && j[k].is_string(); }

bool owned_id(const std::string& id, const std::string& did) {
  return id.size() > did.size() + 1 && id.compare(0, did.size(), did) == 0 && id[did.size()] == ':';
}

std::optional<AttributeSpec> parse_attribute(const json& a, Rejection& err) {
  if (auto r = check_fields(a, {"name", "type", "precision", "v_max"}, "attribute spec")) {
    err = *r;
    return std::nullopt;
  }
  if (!a["name"].is_string() || !a["type"].is_string() || !a["precision"].is_number_integer() ||
      !a["v_max"].is_number_integer()) {
    err = reject("malformed", "attribute spec has wrong field types");
    return std::nullopt;
  }
  AttributeSpec s{a["name"].get<std::string>(), a["type"].get<std::string>(), a["precision"].get<int>(),
                  a["v_max"].get<std::int64_t>()};
  if (s.name.empty()) {
    err = reject("malformed", "empty attribute name");
    return std::nullopt;
  }
  if (s.type == "string") {
    if (s.precision != 0 || s.v_max != 0) {
      err = reject("malformed", "string attributes take no precision or v_max");
      return std::nullopt;
    }
  } else if (s.type == "int") {
    if (s.precision < 0 || s.precision > 6 || s.v_max < 0 || s.v_max > crypto::kMaxChainLength) {
      err = reject("malformed", "int attribute precision/v_max out of range");
      return std::nullopt;
    }
  } else {
    err = reject("malformed", "attribute type must be string or int");
    return std::nullopt;
  }
  return s;
}

json attribute_json(const AttributeSpec& s) {
  return {{"name", s.name}, {"type", s.type}, {"precision", s.precision}, {"v_max", s.v_max}};
}

}  // namespace

std::optional<Rejection> LedgerState::validate(const Transaction& tx) const {
  const auto& p = tx.payload;
  if (seen_nonces_.count(tx.replay_key())) return reject("replayed-nonce", "nonce already used");

  crypto::VerificationKey signer;
  if (tx.kind == TxKind::kNym) {
    if (auto r = check_fields(p, {"did", "verkey", "role"}, "NYM payload")) return r;
    if (!is_string(p, "did") || !is_string(p, "verkey") || !is_string(p, "role")) {
      return reject("malformed", "NYM fields must be strings");
    }
    try {
      signer = crypto::VerificationKey::from_base58(p["verkey"].get<std::string>());
    } catch (const Error&) {
      return reject("malformed", "NYM verkey is not a base58 key");
    }
    if (crypto::did_from_verkey(signer) != p["did"].get<std::string>()) {
      return reject("malformed", "DID does not derive from verkey");
    }
    if (tx.author_did != p["did"].get<std::string>()) {
      return reject("not-owner", "NYMs are self-registered");
    }
    if (!kNymRoles.count(p["role"].get<std::string>())) return reject("malformed", "unknown NYM role");
    if (auto it = nyms_.find(tx.author_did); it != nyms_.end()) {
      if (it->second.verkey != signer) return reject("nym-key-conflict", "DID already bound to another key");
      return reject("duplicate", "DID already registered");
    }
  } else {
    auto it = nyms_.find(tx.author_did);
    if (it == nyms_.end()) return reject("unknown-author", "author DID has no NYM");
    signer = it->second.verkey;
  }
  if (!crypto::verify(signer, crypto::as_bytes(tx.signing_bytes()), tx.author_signature)) {
    return reject("bad-signature", "author signature does not verify");
  }

  switch (tx.kind) {
    case TxKind::kNym:
      return std::nullopt;
    case TxKind::kSchema: {
      if (auto r = check_fields(p, {"id", "name", "version", "attributes"}, "SCHEMA payload")) return r;
      if (!is_string(p, "id") || !is_string(p, "name") || !is_string(p, "version") ||
          !p["attributes"].is_array() || p["attributes"].empty()) {
        return reject("malformed", "SCHEMA fields have wrong types");
      }
      const auto id = p["id"].get<std::string>();
      if (id != tx.author_did + ":" + p["name"].get<std::string>() + ":" + p["version"].get<std::string>()) {
        return reject("malformed", "schema id must be issuer_did:name:version");
      }
      std::set<std::string> names;
      for (const auto& a : p["attributes"]) {
        Rejection err;
        auto spec = parse_attribute(a, err);
        if (!spec) return err;
        if (!names.insert(spec->name).second) return reject("malformed", "duplicate attribute name");
      }
      if (schemas_.count(id)) return reject("duplicate", "schema id already on ledger");
      return std::nullopt;
    }
    case TxKind::kCredDef: {
      if (auto r = check_fields(p, {"id", "schema_id", "issuer_did", "verkey", "revoc_reg_id", "chains"},
                                "CRED_DEF payload")) {
        return r;
      }
      for (auto k : {"id", "schema_id", "issuer_did", "verkey", "revoc_reg_id"}) {
        if (!is_string(p, k)) return reject("malformed", "CRED_DEF fields have wrong types");
      }
      const auto id = p["id"].get<std::string>();
      if (!owned_id(id, tx.author_did) || !owned_id(p["revoc_reg_id"].get<std::string>(), tx.author_did)) {
        return reject("not-owner", "cred-def and registry ids must be prefixed by the issuer DID");
      }
      if (p["issuer_did"] != tx.author_did) return reject("not-owner", "issuer_did must be the author");
      if (p["verkey"].get<std::string>() != signer.base58()) {
        return reject("bad-signature", "cred-def key differs from the issuer NYM key");
      }
      const auto* schema = this->schema(p["schema_id"].get<std::string>());
      if (!schema) return reject("unknown-schema", "schema not on ledger");
      if (!p["chains"].is_array()) return reject("malformed", "chains must be an array");
      std::size_t int_attrs = 0;
      for (const auto& a : schema->attributes) int_attrs += a.type == "int";
      if (p["chains"].size() != int_attrs) return reject("malformed", "one chain per int attribute");
      for (const auto& c : p["chains"]) {
        if (auto r = check_fields(c, {"attr", "v_max"}, "chain")) return r;
        bool match = false;
        for (const auto& a : schema->attributes) {
          match = match || (a.type == "int" && c["attr"] == a.name && c["v_max"] == a.v_max);
        }
        if (!match) return reject("malformed", "chain does not match a schema int attribute");
      }
      if (cred_defs_.count(id)) return reject("duplicate", "cred-def id already on ledger");
      return std::nullopt;
    }
    case TxKind::kRevocRegDef: {
      if (auto r = check_fields(p, {"id", "cred_def_id"}, "REVOC_REG_DEF payload")) return r;
      if (!is_string(p, "id") || !is_string(p, "cred_def_id")) return reject("malformed", "bad field types");
      const auto* cd = cred_def(p["cred_def_id"].get<std::string>());
      if (!cd) return reject("unknown-cred-def", "cred-def not on ledger");
      if (cd->issuer_did != tx.author_did) return reject("not-owner", "registry must belong to the cred-def issuer");
      if (cd->revoc_reg_id != p["id"]) return reject("malformed", "registry id differs from the cred-def's");
      if (registries_.count(p["id"].get<std::string>())) return reject("duplicate", "registry already defined");
      return std::nullopt;
    }
    case TxKind::kRevocRegEntry: {
      if (auto r = check_fields(p, {"revoc_reg_id", "handles"}, "REVOC_REG_ENTRY payload")) return r;
      if (!is_string(p, "revoc_reg_id") || !p["handles"].is_array() || p["handles"].empty()) {
        return reject("malformed", "bad field types");
      }
      const auto* reg = registry(p["revoc_reg_id"].get<std::string>());
      if (!reg) return reject("unknown-registry", "revocation registry not on ledger");
      if (reg->issuer_did != tx.author_did) return reject("not-owner", "only the issuer may revoke");
      std::set<std::string> handles;
      for (const auto& h : p["handles"]) {
        if (!h.is_string()) return reject("malformed", "handles must be hex digests");
        try {
          auto d = crypto::Digest32::from_hex(h.get<std::string>());
          if (d.hex() != h.get<std::string>()) return reject("malformed", "handles must be lowercase hex");
          if (reg->revoked.count(d)) return reject("duplicate", "handle already revoked");
        } catch (const Error&) {
          return reject("malformed", "handles must be hex digests");
        }
        if (!handles.insert(h.get<std::string>()).second) return reject("duplicate", "repeated handle");
      }
      return std::nullopt;
    }
  }
  return reject("unknown-kind", "unhandled kind");
}

void LedgerState::apply(const Transaction& tx, std::int64_t height) {
  const auto& p = tx.payload;
  seen_nonces_.insert(tx.replay_key());
  switch (tx.kind) {
    case TxKind::kNym: {
      auto did = p["did"].get<std::string>();
      nyms_[did] = {did, crypto::VerificationKey::from_base58(p["verkey"].get<std::string>()),
                    p["role"].get<std::string>(), height};
      break;
    }
    case TxKind::kSchema: {
      SchemaRecord s{p["id"], tx.author_did, p["name"], p["version"], {}, height};
      for (const auto& a : p["attributes"]) {
        s.attributes.push_back({a["name"], a["type"], a["precision"].get<int>(), a["v_max"].get<std::int64_t>()});
      }
      schemas_[s.id] = s;
      break;
    }
    case TxKind::kCredDef: {
      CredDefRecord c{p["id"], p["schema_id"], p["issuer_did"],
                      crypto::VerificationKey::from_base58(p["verkey"].get<std::string>()), p["revoc_reg_id"], {},
                      height};
      for (const auto& ch : p["chains"]) c.chains.emplace_back(ch["attr"], ch["v_max"].get<std::int64_t>());
      cred_defs_[c.id] = c;
      break;
    }
    case TxKind::kRevocRegDef: {
      RevocationRegistry r{p["id"], p["cred_def_id"], tx.author_did, {}, height};
      registries_[r.id] = r;
      break;
    }
    case TxKind::kRevocRegEntry: {
      auto& reg = registries_.at(p["revoc_reg_id"].get<std::string>());
      for (const auto& h : p["handles"]) reg.revoked.emplace(crypto::Digest32::from_hex(h.get<std::string>()), height);
      break;
    }
  }
}

const NymRecord* LedgerState::nym(const std::string& did) const {
  auto it = nyms_.find(did);
  return it == nyms_.end() ? nullptr : &it->second;
}
const SchemaRecord* LedgerState::schema(const std::string& id) const {
  auto it = schemas_.find(id);
  return it == schemas_.end() ? nullptr : &it->second;
}
const CredDefRecord* LedgerState::cred_def(const std::string& id) const {
  auto it = cred_defs_.find(id);
  return it == cred_defs_.end() ? nullptr : &it->second;
}
const RevocationRegistry* LedgerState::registry(const std::string& id) const {
  auto it = registries_.find(id);
  return it == registries_.end() ? nullptr : &it->second;
}

bool LedgerState::is_revoked(const std::string& registry_id, const crypto::Digest32& handle,
                             std::int64_t at_height) const {
  const auto* reg = registry(registry_id);
  if (!reg) throw Error("unknown-registry", "unknown revocation registry " + registry_id);
  auto it = reg->revoked.find(handle);
  return it != reg->revoked.end() && it->second <= at_height;
}

QueryResult LedgerState::query(const QueryKey& key) const { return query(key, height_); }

QueryResult LedgerState::query(const QueryKey& key, std::int64_t at_height) const {
  QueryResult out;
  out.height = at_height;
  const json all = to_json();
  auto lookup = [&](const char* table, const std::string& id, std::int64_t created) {
    if (created <= at_height) {
      out.found = true;
      out.entry = all[table][id];
    }
  };
  if (auto* k = std::get_if<NymKey>(&key)) {
    if (auto* r = nym(k->did)) lookup("nyms", k->did, r->height);
  } else if (auto* k = std::get_if<SchemaKey>(&key)) {
    if (auto* r = schema(k->id)) lookup("schemas", k->id, r->height);
  } else if (auto* k = std::get_if<CredDefKey>(&key)) {
    if (auto* r = cred_def(k->id)) lookup("cred_defs", k->id, r->height);
  } else if (auto* k = std::get_if<RevokedKey>(&key)) {
    out.found = true;
    out.entry = {{"revoked", is_revoked(k->registry_id, k->handle, at_height)}};
  }
  return out;
}

json LedgerState::to_json() const {
  json j = {{"height", height_}, {"tip_hash", tip_hash_.hex()}};
  j["nyms"] = json::object();
  for (const auto& [did, r] : nyms_) {
    j["nyms"][did] = {{"did", r.did}, {"verkey", r.verkey.base58()}, {"role", r.role}, {"height", r.height}};
  }
  j["schemas"] = json::object();
  for (const auto& [id, s] : schemas_) {
    json attrs = json::array();
    for (const auto& a : s.attributes) attrs.push_back(attribute_json(a));
    j["schemas"][id] = {{"id", s.id},           {"issuer_did", s.issuer_did}, {"name", s.name},
                        {"version", s.version}, {"attributes", attrs},        {"height", s.height}};
  }
  j["cred_defs"] = json::object();
  for (const auto& [id, c] : cred_defs_) {
    json chains = json::array();
    for (const auto& [attr, vmax] : c.chains) chains.push_back({{"attr", attr}, {"v_max", vmax}});
    j["cred_defs"][id] = {{"id", c.id},
                          {"schema_id", c.schema_id},
                          {"issuer_did", c.issuer_did},
                          {"verkey", c.verkey.base58()},
                          {"revoc_reg_id", c.revoc_reg_id},
                          {"chains", chains},
                          {"height", c.height}};
  }
  j["revocation_registries"] = json::object();
  for (const auto& [id, r] : registries_) {
    json revoked = json::object();
    for (const auto& [h, height] : r.revoked) revoked[h.hex()] = height;
    j["revocation_registries"][id] = {{"id", r.id},
                                      {"cred_def_id", r.cred_def_id},
                                      {"issuer_did", r.issuer_did},
                                      {"revoked", revoked},
                                      {"height", r.height}};
  }
  j["seen_nonces"] = seen_nonces_;
  return j;
}

crypto::Digest32 LedgerState::digest() const { return crypto::hash(canonical(to_json())); }

std::optional<Rejection> validate_transaction(const json& raw, const LedgerState& state) {
  try {
    return state.validate(Transaction::from_json(raw));
  } catch (const Error& e) {
    return reject(e.code() == "unknown-kind" ? "unknown-kind" : "malformed", e.what());
  }
}

LedgerState apply_block(const LedgerState& state, const Block& block,
                        const std::vector<ValidatorInfo>& validators) {
  if (block.height != state.height() + 1) {
    throw Error("bad-height", "expected height " + std::to_string(state.height() + 1));
  }
  const crypto::Digest32 expected_prev = block.height == 0 ? crypto::Digest32{} : state.tip_hash();
  if (block.prev_hash != expected_prev) throw Error("bad-prev-hash", "prev_hash does not link to tip");
  if (compute_tx_root(block.txs) != block.tx_root) throw Error("bad-tx-root", "tx_root mismatch");
  const auto hash = block.hash();
  if (block.height > 0) {
    const ValidatorInfo* proposer = nullptr;
    for (const auto& v : validators) {
      if (v.id == block.proposer) proposer = &v;
    }
    if (!proposer || !crypto::verify(proposer->verkey, crypto::as_bytes(block.proposal_bytes()),
                                     block.proposer_signature)) {
      throw Error("bad-proposer", "proposer signature invalid");
    }
    std::string why;
    if (!verify_votes(Phase::kCommit, block.height, hash, block.quorum_certificate, validators, &why)) {
      throw Error("bad-certificate", why);
    }
  }
  LedgerState next = state;
  for (const auto& tx : block.txs) {
    if (auto r = next.validate(tx)) throw Error("invalid-tx", r->code + ": " + r->detail);
    next.apply(tx, block.height);
  }
  next.set_tip(block.height, hash);
  return next;
}

}  // namespace omic::ledger
