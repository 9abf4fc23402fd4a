#include "omic/exchange/project.hpp"

#include "omic/error.hpp"
#include "omic/ledger/transaction.hpp"

namespace omic::exchange {

json criteria_json(const std::vector<credentials::RequestedCredential>& criteria) {
  // Same shape as a presentation request's "requested" list.
  credentials::PresentationRequest r;
  r.requested = criteria;
  return r.to_json().at("requested");
}

std::vector<credentials::RequestedCredential> criteria_from_json(const json& j) {
  json wrapped = {{"nonce", "00000000000000000000000000000000"}, {"requested", j}, {"purpose_id", ""}};
  return credentials::PresentationRequest::from_json(wrapped).requested;
}

crypto::Digest32 approved_attrs_hash(const std::vector<credentials::RequestedCredential>& criteria) {
  return crypto::hash_tagged("approved-attrs", {crypto::as_bytes(ledger::canonical(criteria_json(criteria)))});
}

crypto::Digest32 ResearchProject::terms_hash() const { return crypto::hash(consent_terms); }

crypto::Digest32 ResearchProject::approved_attrs_hash() const { return exchange::approved_attrs_hash(criteria); }

std::set<std::string> ResearchProject::reveal_set() const {
  std::set<std::string> out;
  for (const auto& c : criteria) out.insert(c.reveal.begin(), c.reveal.end());
  return out;
}

std::set<std::string> ResearchProject::predicate_set() const {
  std::set<std::string> out;
  for (const auto& c : criteria) {
    for (const auto& p : c.predicates) out.insert(p.attr);
  }
  return out;
}

json reward_json(const RewardSpec& r) {
  return {{"kind", r.kind}, {"amount", r.amount}, {"currency_label", r.currency_label}};
}

RewardSpec reward_from_json(const json& j) {
  return {j.at("kind").get<std::string>(), j.at("amount").get<std::int64_t>(), j.value("currency_label", "")};
}

json ResearchProject::to_json() const {
  return {{"project_id", project_id},
          {"title", title},
          {"org_type", org_type},
          {"purpose", purpose},
          {"criteria", criteria_json(criteria)},
          {"consent_terms", consent_terms},
          {"terms_hash", terms_hash().hex()},
          {"reward", reward_json(reward)}};
}

ResearchProject ResearchProject::from_json(const json& j) {
  try {
    ResearchProject p;
    p.project_id = j.at("project_id").get<std::string>();
    p.title = j.value("title", "");
    p.org_type = j.value("org_type", "");
    p.purpose = j.value("purpose", "");
    p.criteria = criteria_from_json(j.at("criteria"));
    p.consent_terms = j.at("consent_terms").get<std::string>();
    p.reward = reward_from_json(j.at("reward"));
    return p;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("project: ") + e.what());
  }
}

json EthicsApplication::to_json() const {
  return {{"researcher_did", researcher_did}, {"project", project.to_json()}, {"protocol_summary", protocol_summary}};
}

EthicsApplication EthicsApplication::from_json(const json& j) {
  try {
    return {j.at("researcher_did").get<std::string>(), ResearchProject::from_json(j.at("project")),
            j.value("protocol_summary", "")};
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("application: ") + e.what());
  }
}

std::string Advert::canonical_body() const {
  return ledger::canonical({{"project_id", project_id},
                            {"title", title},
                            {"org_type", org_type},
                            {"purpose", purpose},
                            {"criteria", criteria},
                            {"reward", reward_json(reward)},
                            {"terms_hash", terms_hash},
                            {"researcher_did", researcher_did},
                            {"invitation", invitation}});
}

json Advert::to_json() const {
  auto j = json::parse(canonical_body());
  j["advert_id"] = advert_id;
  j["posted_at"] = posted_at;
  return j;
}

Advert Advert::from_json(const json& j) {
  try {
    Advert a;
    a.advert_id = j.value("advert_id", "");
    a.project_id = j.at("project_id").get<std::string>();
    a.title = j.value("title", "");
    a.org_type = j.value("org_type", "");
    a.purpose = j.value("purpose", "");
    a.criteria = j.at("criteria");
    a.reward = reward_from_json(j.at("reward"));
    a.terms_hash = j.at("terms_hash").get<std::string>();
    a.researcher_did = j.value("researcher_did", "");
    a.invitation = j.at("invitation");
    a.posted_at = j.value("posted_at", std::int64_t{0});
    return a;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("advert: ") + e.what());
  }
}

std::string advert_id_for(const Advert& a) {
  const auto d = crypto::hash_tagged("advert", {crypto::as_bytes(a.canonical_body())});
  return crypto::to_hex({d.bytes.data(), 16});
}

Advert make_advert(const ResearchProject& p, const std::string& researcher_did, const json& invitation) {
  Advert a;
  a.project_id = p.project_id;
  a.title = p.title;
  a.org_type = p.org_type;
  a.purpose = p.purpose;
  a.criteria = criteria_json(p.criteria);
  a.reward = p.reward;
  a.terms_hash = p.terms_hash().hex();
  a.researcher_did = researcher_did;
  a.invitation = invitation;
  a.advert_id = advert_id_for(a);
  return a;
}

}  // namespace omic::exchange
