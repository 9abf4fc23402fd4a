#include "omic/exchange/bulletin_board.hpp"

#include "omic/error.hpp"

namespace omic::exchange {

BulletinBoard::BulletinBoard(const agent::LedgerClient& ledger, std::string ethics_cred_def_id, DayClock today,
                             crypto::Drbg rng)
    : ledger_(ledger), ethics_cred_def_id_(std::move(ethics_cred_def_id)), today_(std::move(today)), rng_(rng) {}

credentials::PresentationRequest BulletinBoard::challenge() {
  auto req = ethics_request(ethics_cred_def_id_, today_(), "advert", rng_);
  nonces_.issue(req.nonce);
  return req;
}

Advert BulletinBoard::publish(Advert advert, const std::optional<credentials::Presentation>& certificate,
                              const credentials::PresentationRequest& challenge) {
  auto reject = [&](const std::string& code, const std::string& why, const json& report = nullptr) {
    rejections_.push_back({{"project_id", advert.project_id}, {"code", code}, {"report", report}});
    throw Error(code, why);
  };
  if (!kOrgTypes.count(advert.org_type)) reject("bad-org-type", "organization type must be one of the known kinds");
  if (!certificate) reject("no-certificate", "an ethics certificate presentation is required");
  std::vector<credentials::RequestedCredential> criteria;
  try {
    criteria = criteria_from_json(advert.criteria);
  } catch (const Error&) {
    reject("malformed", "advert criteria do not parse");
  }
  const auto report = verify_ethics(*certificate, challenge, ledger_.state(), nonces_,
                                    {advert.project_id, advert.org_type, approved_attrs_hash(criteria)});
  if (!report.accept) {
    reject("certificate-rejected", "certificate check failed: " + report.first_failure(), report.to_json());
  }
  advert.advert_id = advert_id_for(advert);
  for (const auto& a : adverts_) {
    if (a.advert_id == advert.advert_id) reject("duplicate", "advert already posted");
  }
  advert.posted_at = ++clock_;
  adverts_.push_back(advert);
  return advert;
}

std::vector<Advert> BulletinBoard::list(const std::string& org_type) const {
  std::vector<Advert> out;
  for (const auto& a : adverts_) {
    if (org_type.empty() || a.org_type == org_type) out.push_back(a);
  }
  return out;
}

std::optional<Advert> BulletinBoard::find(const std::string& advert_id) const {
  for (const auto& a : adverts_) {
    if (a.advert_id == advert_id) return a;
  }
  return std::nullopt;
}

std::vector<std::string> BulletinBoard::dump() const {
  std::vector<std::string> out;
  for (const auto& a : adverts_) out.push_back(a.to_json().dump());
  return out;
}

}  // namespace omic::exchange
