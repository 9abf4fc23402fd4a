#pragma once

#include <functional>
#include <memory>

#include "omic/credentials/protocols.hpp"
#include "omic/exchange/project.hpp"

namespace omic::exchange {

// Day numbers count days since 1970-01-01.
using DayClock = std::function<std::int64_t()>;

inline constexpr std::int64_t kExpiryVmax = 65536;
inline constexpr std::int64_t kRewardCapVmax = 1000;

// {project_id, org_type, approved_attrs_hash, expiry, reward_cap}
std::vector<ledger::AttributeSpec> ethics_schema_attributes();

struct ReviewPolicy {
  std::int64_t reward_cap = 50;
  std::int64_t expiry_days = 365;
};

struct ReviewDecision {
  bool approved = false;
  std::string reason;  // machine-readable when rejected
};

// Extra rules return a rejection reason.
using ReviewRule = std::function<std::optional<std::string>(const EthicsApplication&)>;

// Default rules, in order: org_type present and known (missing-org-type),
// criteria non-empty (empty-criteria), reward within cap (reward-exceeds-cap).
ReviewDecision review_application(const EthicsApplication& app, const ReviewPolicy& policy,
                                  const std::vector<ReviewRule>& extra = {});

// The certificate presentation both the board and data owners ask for:
// project_id, org_type, approved_attrs_hash and reward_cap revealed, expiry
// proven to be at least `today`.
credentials::PresentationRequest ethics_request(const std::string& ethics_cred_def_id, std::int64_t today,
                                               const std::string& purpose_id, crypto::Drbg& rng);

struct EthicsExpectation {
  std::string project_id;
  std::string org_type;
  crypto::Digest32 approved_attrs_hash;
};

// verify_presentation plus three binding lines: "project", "org-type" and
// "criteria". Binding lines are only added when the presentation verified.
credentials::VerificationReport verify_ethics(const credentials::Presentation& p,
                                              const credentials::PresentationRequest& request,
                                              const ledger::LedgerState& state, credentials::NonceBook& nonces,
                                              const EthicsExpectation& expect);

// Abort reason for a failed ethics report: "expired" for the expiry
// predicate, "revoked" for revocation, otherwise the failing check name.
std::string ethics_failure_reason(const credentials::VerificationReport& report);

// Receives applications over the ethics-review protocol and answers with a
// decision; approvals are followed by a certificate offer on the same
// connection.
class EthicsBoard {
 public:
  EthicsBoard(agent::Agent& agent, ReviewPolicy policy, DayClock today);

  // Public DID, ethics schema and cred-def. Needs a ledger.
  void setup();
  void add_rule(ReviewRule rule) { rules_.push_back(std::move(rule)); }

  const std::string& cred_def_id() const { return cred_def_id_; }
  const std::string& schema_id() const { return schema_id_; }
  const ReviewPolicy& policy() const { return policy_; }
  std::int64_t today() const { return today_(); }

  // Revokes every certificate issued for the project.
  std::vector<ledger::Receipt> revoke(const std::string& project_id);

  // One entry per application: {project_id, approved, reason, thread_id}.
  const std::vector<json>& decisions() const { return decisions_; }

 private:
  void handle(agent::Agent& self, const agent::Connection& conn, const agent::Message& msg, agent::Effects& fx);

  agent::Agent& agent_;
  ReviewPolicy policy_;
  DayClock today_;
  std::vector<ReviewRule> rules_;
  std::string schema_id_;
  std::string cred_def_id_;
  std::unique_ptr<credentials::IssuerService> issuer_;
  std::multimap<std::string, std::string> issued_;  // project -> issue thread
  std::vector<json> decisions_;
};

}  // namespace omic::exchange
