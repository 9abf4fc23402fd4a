#pragma once

#include <set>

#include "omic/credentials/presentation.hpp"

namespace omic::exchange {

using json = nlohmann::json;

inline constexpr std::string_view kHandshakeProtocol = "research-handshake/1.0";
inline constexpr std::string_view kEthicsProtocol = "ethics-review/1.0";

// Owners introduce themselves to researchers under this label only.
inline constexpr std::string_view kAnonymousLabel = "anonymous";

inline const std::set<std::string> kOrgTypes = {"university", "government", "pharma", "insurer", "other"};

struct BiomarkerRecord {
  std::string name;
  std::string value;  // decimal text
  std::string unit;
  std::string measured_at;  // YYYY-MM-DD
};

struct RewardSpec {
  std::string kind = "honorarium";
  std::int64_t amount = 0;
  std::string currency_label = "USD";
};

struct ResearchProject {
  std::string project_id;
  std::string title;
  std::string org_type;
  std::string purpose;
  // Predicates decide eligibility; reveals are what consent may release.
  std::vector<credentials::RequestedCredential> criteria;
  std::string consent_terms;
  RewardSpec reward;

  crypto::Digest32 terms_hash() const;
  // Binds an ethics certificate to this exact criteria set.
  crypto::Digest32 approved_attrs_hash() const;
  std::set<std::string> reveal_set() const;
  std::set<std::string> predicate_set() const;

  json to_json() const;
  static ResearchProject from_json(const json& j);
};

json criteria_json(const std::vector<credentials::RequestedCredential>& criteria);
std::vector<credentials::RequestedCredential> criteria_from_json(const json& j);
crypto::Digest32 approved_attrs_hash(const std::vector<credentials::RequestedCredential>& criteria);

struct EthicsApplication {
  std::string researcher_did;
  ResearchProject project;
  std::string protocol_summary;

  json to_json() const;
  static EthicsApplication from_json(const json& j);
};

// What the bulletin board shows. Consent terms travel in the handshake; the
// advert carries their hash.
struct Advert {
  std::string advert_id;
  std::string project_id;
  std::string title;
  std::string org_type;
  std::string purpose;
  json criteria = json::array();
  RewardSpec reward;
  std::string terms_hash;  // hex
  std::string researcher_did;
  json invitation = json::object();
  std::int64_t posted_at = 0;

  // Everything except advert_id and posted_at.
  std::string canonical_body() const;
  json to_json() const;
  static Advert from_json(const json& j);
};

// First 16 bytes of H("advert" || canonical body), hex.
std::string advert_id_for(const Advert& a);
Advert make_advert(const ResearchProject& p, const std::string& researcher_did, const json& invitation);

json reward_json(const RewardSpec& r);
RewardSpec reward_from_json(const json& j);

}  // namespace omic::exchange
