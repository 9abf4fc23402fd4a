#include "omic/credentials/presentation.hpp"

#include <algorithm>

#include "omic/error.hpp"

namespace omic::credentials {

namespace {

json path_json(const crypto::MerklePath& p) {
  json sib = json::array();
  for (const auto& s : p.siblings) {
    sib.push_back({{"side", s.side == crypto::Side::kLeft ? "left" : "right"}, {"digest", s.digest.hex()}});
  }
  return {{"leaf_index", p.leaf_index}, {"siblings", sib}};
}

crypto::MerklePath path_from_json(const json& j) {
  crypto::MerklePath p;
  p.leaf_index = j.at("leaf_index").get<std::size_t>();
  for (const auto& s : j.at("siblings")) {
    const auto side = s.at("side").get<std::string>();
    if (side != "left" && side != "right") throw Error("malformed", "bad sibling side");
    p.siblings.push_back({side == "left" ? crypto::Side::kLeft : crypto::Side::kRight,
                          crypto::Digest32::from_hex(s.at("digest").get<std::string>())});
  }
  return p;
}

json body_json(const Presentation& p) {
  json creds = json::array();
  for (const auto& c : p.credentials) {
    json anc = json::array();
    for (const auto& a : c.anchors) anc.push_back(anchor_json(a));
    json rev = json::array();
    for (const auto& r : c.revealed) {
      rev.push_back({{"name", r.name}, {"value", r.value}, {"salt", crypto::to_hex(r.salt)}, {"path", path_json(r.path)}});
    }
    json preds = json::array();
    for (const auto& pr : c.predicates) {
      preds.push_back({{"attr", pr.attr}, {"threshold", pr.threshold}, {"proof", pr.proof.hex()}});
    }
    creds.push_back({{"cred_def_id", c.cred_def_id},
                     {"merkle_root", c.merkle_root.hex()},
                     {"anchors", anc},
                     {"revocation_handle", c.revocation_handle.hex()},
                     {"issuer_signature", c.issuer_signature.hex()},
                     {"ledger_height", c.ledger_height},
                     {"revealed", rev},
                     {"predicates", preds}});
  }
  return {{"nonce", crypto::to_hex(p.nonce)},
          {"purpose_id", p.purpose_id},
          {"credentials", creds},
          {"binding_key", p.binding_key.hex()}};
}

}  // namespace

json PresentationRequest::to_json() const {
  json req = json::array();
  for (const auto& r : requested) {
    json preds = json::array();
    for (const auto& p : r.predicates) preds.push_back({{"attr", p.attr}, {"op", ">="}, {"threshold", p.threshold}});
    req.push_back({{"cred_def_id", r.cred_def_id}, {"reveal", r.reveal}, {"predicates", preds}});
  }
  return {{"nonce", crypto::to_hex(nonce)}, {"requested", req}, {"purpose_id", purpose_id}};
}

PresentationRequest PresentationRequest::from_json(const json& j) {
  try {
    PresentationRequest r;
    r.nonce = crypto::from_hex(j.at("nonce").get<std::string>());
    r.purpose_id = j.at("purpose_id").get<std::string>();
    for (const auto& q : j.at("requested")) {
      RequestedCredential rc;
      rc.cred_def_id = q.at("cred_def_id").get<std::string>();
      rc.reveal = q.at("reveal").get<std::vector<std::string>>();
      for (const auto& p : q.at("predicates")) {
        if (p.at("op") != ">=") throw Error("malformed", "only >= predicates are supported");
        rc.predicates.push_back({p.at("attr").get<std::string>(), p.at("threshold").get<std::int64_t>()});
      }
      r.requested.push_back(std::move(rc));
    }
    if (r.nonce.size() != 16) throw Error("malformed", "request nonce must be 16 bytes");
    return r;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("presentation request: ") + e.what());
  }
}

PresentationRequest make_request(std::vector<RequestedCredential> requested, std::string purpose_id,
                                 crypto::Drbg& rng) {
  return {rng.bytes(16), std::move(requested), std::move(purpose_id)};
}

std::string Presentation::body_bytes() const { return body_json(*this).dump(); }

json Presentation::to_json() const {
  auto j = body_json(*this);
  j["binding_signature"] = binding_signature.hex();
  return j;
}

Presentation Presentation::from_json(const json& j) {
  try {
    Presentation p;
    p.nonce = crypto::from_hex(j.at("nonce").get<std::string>());
    p.purpose_id = j.at("purpose_id").get<std::string>();
    for (const auto& c : j.at("credentials")) {
      PresentedCredential pc;
      pc.cred_def_id = c.at("cred_def_id").get<std::string>();
      pc.merkle_root = crypto::Digest32::from_hex(c.at("merkle_root").get<std::string>());
      for (const auto& a : c.at("anchors")) pc.anchors.push_back(anchor_from_json(a));
      pc.revocation_handle = crypto::Digest32::from_hex(c.at("revocation_handle").get<std::string>());
      pc.issuer_signature = crypto::Signature::from_hex(c.at("issuer_signature").get<std::string>());
      pc.ledger_height = c.at("ledger_height").get<std::int64_t>();
      for (const auto& r : c.at("revealed")) {
        pc.revealed.push_back({r.at("name").get<std::string>(), r.at("value").get<std::string>(),
                               crypto::salt_from_hex(r.at("salt").get<std::string>()), path_from_json(r.at("path"))});
      }
      for (const auto& pr : c.at("predicates")) {
        pc.predicates.push_back({pr.at("attr").get<std::string>(), pr.at("threshold").get<std::int64_t>(),
                                 crypto::Digest32::from_hex(pr.at("proof").get<std::string>())});
      }
      p.credentials.push_back(std::move(pc));
    }
    p.binding_key = crypto::VerificationKey::from_hex(j.at("binding_key").get<std::string>());
    p.binding_signature = crypto::Signature::from_hex(j.at("binding_signature").get<std::string>());
    return p;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("presentation: ") + e.what());
  }
}

Presentation create_presentation(std::span<const HeldCredential> wallet, const PresentationRequest& request,
                                 std::int64_t ledger_height, crypto::Drbg& rng) {
  Presentation p;
  p.nonce = request.nonce;
  p.purpose_id = request.purpose_id;
  for (const auto& req : request.requested) {
    const HeldCredential* held = nullptr;
    for (const auto& h : wallet) {
      if (h.credential.cred_def_id == req.cred_def_id) held = &h;
    }
    if (!held) throw Error("not-held", "no credential for " + req.cred_def_id);
    const auto& c = held->credential;
    const auto leaves = c.leaves();
    PresentedCredential pc;
    pc.cred_def_id = c.cred_def_id;
    pc.merkle_root = c.merkle_root;
    pc.anchors = c.anchors;
    pc.revocation_handle = c.revocation_handle;
    pc.issuer_signature = c.issuer_signature;
    pc.ledger_height = ledger_height;
    for (const auto& name : req.reveal) {
      auto it = std::find_if(c.attributes.begin(), c.attributes.end(), [&](const auto& a) { return a.name == name; });
      if (it == c.attributes.end()) throw Error("unknown-attribute", "credential has no attribute " + name);
      const auto idx = static_cast<std::size_t>(it - c.attributes.begin());
      pc.revealed.push_back({it->name, it->value, it->salt, crypto::merkle_prove(leaves, idx)});
    }
    for (const auto& pred : req.predicates) {
      auto tok = held->holder_tokens.find(pred.attr);
      auto enc = held->encoded.find(pred.attr);
      if (tok == held->holder_tokens.end() || enc == held->encoded.end()) {
        throw Error("unknown-attribute", "no integer attribute " + pred.attr);
      }
      if (pred.threshold < 0 || enc->second < pred.threshold) {
        throw Error("cannot-satisfy", pred.attr + " does not meet the threshold");
      }
      pc.predicates.push_back({pred.attr, pred.threshold, crypto::threshold_prove(tok->second, enc->second, pred.threshold)});
    }
    p.credentials.push_back(std::move(pc));
  }
  const auto binding = crypto::generate_keypair(rng.bytes(32));
  p.binding_key = binding.verification_key();
  p.binding_signature = binding.sign(crypto::as_bytes(p.body_bytes()));
  return p;
}

bool NonceBook::spend(const crypto::Bytes& nonce) {
  const auto h = crypto::to_hex(nonce);
  if (!outstanding_.erase(h)) return false;
  spent_.insert(h);
  return true;
}

json VerificationReport::to_json() const {
  json t = json::array();
  for (const auto& l : trace) t.push_back({{"check", l.check}, {"ok", l.ok}, {"explanation", l.explanation}});
  return {{"overall", accept ? "accept" : "reject"}, {"trace", t}, {"revealed", revealed}};
}

std::string VerificationReport::first_failure() const {
  for (const auto& l : trace) {
    if (!l.ok) return l.check;
  }
  return "";
}

VerificationReport verify_presentation(const Presentation& p, const PresentationRequest& request,
                                       const ledger::LedgerState& ledger, NonceBook& nonces) {
  VerificationReport r;
  auto line = [&](std::string check, bool ok, std::string text) {
    r.trace.push_back({std::move(check), ok, std::move(text)});
    return ok;
  };

  const bool fresh = p.nonce == request.nonce && nonces.spend(request.nonce);
  line("nonce", fresh,
       fresh ? "The presentation answers our outstanding request " + crypto::to_hex(request.nonce).substr(0, 8) + "."
             : "The presentation does not answer an outstanding request of ours; it may be a replay.");

  bool shape = p.purpose_id == request.purpose_id && p.credentials.size() == request.requested.size();
  for (std::size_t i = 0; shape && i < p.credentials.size(); ++i) {
    const auto& c = p.credentials[i];
    const auto& q = request.requested[i];
    std::vector<std::string> names;
    for (const auto& rv : c.revealed) names.push_back(rv.name);
    std::vector<PredicateSpec> preds;
    for (const auto& pr : c.predicates) preds.push_back({pr.attr, pr.threshold});
    shape = c.cred_def_id == q.cred_def_id && names == q.reveal && preds == q.predicates;
  }
  line("request", shape,
       shape ? "It covers exactly what we asked for, for purpose '" + request.purpose_id + "'."
             : "It does not match what we asked for (credentials, attributes, thresholds or purpose differ).");

  const auto now = ledger.height();
  for (const auto& c : p.credentials) {
    const auto* cd = ledger.cred_def(c.cred_def_id);
    const auto* nym = cd ? ledger.nym(cd->issuer_did) : nullptr;
    const auto* schema = cd ? ledger.schema(cd->schema_id) : nullptr;
    const bool issuer_ok = cd && nym && schema && nym->verkey == cd->verkey;
    line("issuer", issuer_ok,
         issuer_ok ? "Issuer " + cd->issuer_did + " and credential definition " + cd->id + " are on the ledger."
                   : "The credential definition or its issuer is not on the ledger.");
    if (!issuer_ok) continue;

    bool anchors_ok = c.anchors.size() == cd->chains.size();
    for (std::size_t i = 0; anchors_ok && i < c.anchors.size(); ++i) {
      anchors_ok = c.anchors[i].attr_name == cd->chains[i].first && c.anchors[i].v_max == cd->chains[i].second;
    }
    const bool sig_ok =
        anchors_ok && crypto::verify(cd->verkey,
                                     crypto::as_bytes(issuer_signing_bytes(c.cred_def_id, c.merkle_root, c.anchors,
                                                                           c.revocation_handle)),
                                     c.issuer_signature);
    line("signature", sig_ok,
         sig_ok ? "The issuer's signature over the hidden-value commitments is genuine."
                : "The issuer's signature does not match: the credential was altered or not issued by them.");

    for (const auto& rv : c.revealed) {
      bool ok = false;
      try {
        std::size_t idx = 0;
        while (idx < schema->attributes.size() && schema->attributes[idx].name != rv.name) ++idx;
        const auto leaf = crypto::commit_attribute(rv.name, rv.value, rv.salt).digest;
        ok = idx < schema->attributes.size() && rv.path.leaf_index == idx &&
             crypto::merkle_verify(c.merkle_root, leaf, rv.path);
      } catch (const Error&) {
        ok = false;
      }
      line("disclosure", ok,
           ok ? "Revealed " + rv.name + " = " + rv.value + " is exactly what the issuer signed."
              : "Revealed " + rv.name + " does not match what the issuer signed.");
      if (ok) r.revealed[rv.name] = rv.value;
    }

    for (const auto& pr : c.predicates) {
      auto it = std::find_if(c.anchors.begin(), c.anchors.end(), [&](const auto& a) { return a.attr_name == pr.attr; });
      const bool ok = sig_ok && it != c.anchors.end() && crypto::threshold_verify(*it, pr.threshold, pr.proof);
      std::string shown = std::to_string(pr.threshold);
      try {
        shown = render_encoded(pr.threshold, find_attribute(*schema, pr.attr).precision);
      } catch (const Error&) {
      }
      line("predicate", ok,
           ok ? "The holder proved " + pr.attr + " is at least " + shown + " without revealing it."
              : "The proof that " + pr.attr + " is at least " + shown + " does not hold.");
    }

    bool revoked = true;
    std::string why;
    try {
      revoked = ledger.is_revoked(cd->revoc_reg_id, c.revocation_handle, now);
      why = revoked ? "The issuer has revoked this credential (checked at ledger height " + std::to_string(now) + ")."
                    : "Not revoked as of ledger height " + std::to_string(now) + ".";
    } catch (const Error&) {
      why = "The revocation registry is missing from the ledger.";
    }
    const bool height_ok = c.ledger_height >= 0 && c.ledger_height <= now;
    if (!height_ok) why = "The presentation cites a ledger height we have not reached.";
    line("revocation", !revoked && height_ok, why);
  }

  const bool bound = crypto::verify(p.binding_key, crypto::as_bytes(p.body_bytes()), p.binding_signature);
  line("binding", bound,
       bound ? "The whole presentation is signed by a one-time key, so nothing was changed in transit."
             : "The one-time signature over the presentation does not verify.");

  r.accept = std::all_of(r.trace.begin(), r.trace.end(), [](const TraceLine& l) { return l.ok; });
  if (!r.accept) r.revealed.clear();
  return r;
}

}  // namespace omic::credentials
