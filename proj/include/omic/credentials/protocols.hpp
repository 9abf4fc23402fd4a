#pragma once

#include <functional>

#include "omic/credentials/presentation.hpp"

namespace omic::credentials {

inline constexpr std::string_view kIssueProtocol = "issue-credential/1.0";
inline constexpr std::string_view kProofProtocol = "present-proof/1.0";

// Issuer side of offer -> request -> issue -> ack.
class IssuerService {
 public:
  IssuerService(agent::Agent& agent, std::string cred_def_id);

  // Starts a thread on the connection. Values are checked against the schema
  // before anything is sent. Returns the thread id.
  std::string offer(const std::string& connection_id, const json& values, agent::Effects& fx);

  // Revokes the credential issued on `thread_id` with a REVOC_REG_ENTRY.
  ledger::Receipt revoke(const std::string& thread_id);
  std::optional<crypto::Digest32> handle_for(const std::string& thread_id) const;

  const std::string& cred_def_id() const { return cred_def_id_; }

 private:
  void handle(agent::Agent& self, const agent::Connection& conn, const agent::Message& msg, agent::Effects& fx);

  agent::Agent& agent_;
  std::string cred_def_id_;
  std::map<std::string, json> pending_;  // thread -> values
};

// Holder side. A policy hook may refuse an offer or an issued credential.
class HolderService {
 public:
  using OfferPolicy = std::function<std::optional<std::string>(const agent::Connection&, const json& offer_body)>;
  using CredentialPolicy = std::function<std::optional<std::string>(const agent::Connection&, const HeldCredential&)>;

  explicit HolderService(agent::Agent& agent);

  void set_offer_policy(OfferPolicy p) { offer_policy_ = std::move(p); }
  void set_credential_policy(CredentialPolicy p) { credential_policy_ = std::move(p); }

  std::vector<HeldCredential> credentials() const;
  std::optional<HeldCredential> find(const std::string& cred_def_id) const;

 private:
  void handle(agent::Agent& self, const agent::Connection& conn, const agent::Message& msg, agent::Effects& fx);

  agent::Agent& agent_;
  OfferPolicy offer_policy_;
  CredentialPolicy credential_policy_;
  std::set<std::string> requested_threads_;
};

// Stand-alone proof exchange: request -> presentation -> ack(report).
class VerifierService {
 public:
  using ReportSink = std::function<void(const std::string& thread_id, const VerificationReport&)>;

  explicit VerifierService(agent::Agent& agent);
  std::string request(const std::string& connection_id, const PresentationRequest& req, agent::Effects& fx);
  void on_report(ReportSink sink) { sink_ = std::move(sink); }
  NonceBook& nonces() { return nonces_; }

 private:
  void handle(agent::Agent& self, const agent::Connection& conn, const agent::Message& msg, agent::Effects& fx);

  agent::Agent& agent_;
  NonceBook nonces_;
  std::map<std::string, PresentationRequest> outstanding_;  // thread -> request
  ReportSink sink_;
};

// Answers present-proof requests from the holder's wallet. The policy decides
// whether to answer at all; refusals and unsatisfiable requests go back as
// problem reports with distinct codes ("declined" vs "cannot-satisfy").
class ProverService {
 public:
  using Policy = std::function<std::optional<std::string>(const agent::Connection&, const PresentationRequest&)>;
  ProverService(agent::Agent& agent, HolderService& holder);
  void set_policy(Policy p) { policy_ = std::move(p); }

 private:
  void handle(agent::Agent& self, const agent::Connection& conn, const agent::Message& msg, agent::Effects& fx);

  agent::Agent& agent_;
  HolderService& holder_;
  Policy policy_;
};

// Handle = H("revoc" || serial); the check runs at the state's height.
bool check_revocation(const ledger::LedgerState& state, const std::string& registry_id,
                      const crypto::Digest32& handle);

}  // namespace omic::credentials
