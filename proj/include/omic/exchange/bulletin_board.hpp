#pragma once

#include <optional>

#include "omic/agent/ledger_client.hpp"
#include "omic/exchange/erb.hpp"

namespace omic::exchange {

// Append-only advert board with logical timestamps. Posting requires a
// certificate presentation answering a fresh challenge.
class BulletinBoard {
 public:
  BulletinBoard(const agent::LedgerClient& ledger, std::string ethics_cred_def_id, DayClock today, crypto::Drbg rng);

  credentials::PresentationRequest challenge();

  // Throws omic::Error("no-certificate") when the presentation is missing,
  // ("certificate-rejected") when it fails verification, ("bad-org-type")
  // for an unknown organization type and ("duplicate") for a repeated advert.
  // Returns the stored advert with its id and timestamp.
  Advert publish(Advert advert, const std::optional<credentials::Presentation>& certificate,
                 const credentials::PresentationRequest& challenge);

  std::vector<Advert> list(const std::string& org_type = "") const;
  std::optional<Advert> find(const std::string& advert_id) const;

  // One JSON object per line: every stored advert in posting order.
  std::vector<std::string> dump() const;
  // Rejected attempts, {project_id, code, report}.
  const std::vector<json>& rejections() const { return rejections_; }

 private:
  const agent::LedgerClient& ledger_;
  std::string ethics_cred_def_id_;
  DayClock today_;
  crypto::Drbg rng_;
  credentials::NonceBook nonces_;
  std::vector<Advert> adverts_;
  std::vector<json> rejections_;
  std::int64_t clock_ = 0;
};

}  // namespace omic::exchange
