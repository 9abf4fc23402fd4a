#pragma once

#include <functional>
#include <memory>

#include "omic/exchange/bulletin_board.hpp"
#include "omic/exchange/handshake.hpp"

namespace omic::exchange {

struct BiomarkerSpec {
  std::string name;
  std::string unit;
  int precision = 1;
  std::int64_t v_max = 1000;
};

// Biomarker issuer. One schema bundles a sample identifier with the panel.
class Myco {
 public:
  Myco(agent::Agent& agent, std::vector<BiomarkerSpec> panel, std::string panel_name = "biomarker-panel");

  void setup();
  const std::string& cred_def_id() const { return issuer_->cred_def_id(); }
  const std::string& schema_id() const { return schema_id_; }
  const std::vector<BiomarkerSpec>& panel() const { return panel_; }
  credentials::IssuerService& issuer() { return *issuer_; }

  // Offers one bundle credential. Throws omic::Error("unknown-biomarker"),
  // ("unit-mismatch"), ("duplicate-biomarker"), ("missing-attribute"),
  // ("out-of-range") or ("bad-value") before anything is sent.
  std::string issue(const std::string& connection_id, const std::string& sample_id,
                    const std::vector<BiomarkerRecord>& records, agent::Effects& fx);

 private:
  agent::Agent& agent_;
  std::vector<BiomarkerSpec> panel_;
  std::string panel_name_;
  std::string schema_id_;
  std::unique_ptr<credentials::IssuerService> issuer_;
};

// Researcher side of the ethics application and every handshake session.
class Researcher {
 public:
  Researcher(agent::Agent& agent, DayClock today);

  // Public DID plus the reward schema and cred-def.
  void setup();
  const std::string& reward_cred_def_id() const { return reward_cred_def_id_; }

  std::string apply(const std::string& erb_connection, const ResearchProject& project, const std::string& summary,
                    agent::Effects& fx);
  // Latest ERB decision for the project, if any.
  std::optional<json> decision(const std::string& project_id) const;
  bool has_certificate(const std::string& project_id) const;

  // Creates the multi-use invitation and posts the advert. Throws whatever
  // the board throws, ("no-certificate") when no certificate is held.
  Advert publish(BulletinBoard& board, const ResearchProject& project);
  // Same, for a board reached some other way (HTTP); `post` returns the
  // stored advert or throws the board's error.
  using AdvertPoster = std::function<Advert(const Advert&, const std::optional<credentials::Presentation>&,
                                            const credentials::PresentationRequest&)>;
  Advert publish_via(const ResearchProject& project, const credentials::PresentationRequest& challenge,
                     const AdvertPoster& post);

  const std::map<std::string, HandshakeSession>& sessions() const { return sessions_; }
  const HandshakeSession& session(const std::string& id) const;
  void abort(const std::string& session_id, const std::string& reason, agent::Effects& fx);
  std::size_t rewards_issued() const { return rewards_issued_; }
  // Opened values per session, only after the package verified.
  const std::map<std::string, std::map<std::string, std::string>>& received_data() const { return data_; }

  // Test hooks.
  void set_eligibility_tamper(std::function<void(credentials::PresentationRequest&)> fn) {
    tamper_ = std::move(fn);
  }
  void set_reward_amount(std::optional<std::int64_t> amount) { reward_override_ = amount; }
  // Sends a reward regardless of the session state.
  void force_reward(const std::string& session_id, agent::Effects& fx);

 private:
  struct Project {
    ResearchProject project;
    std::string invitation_id;
    std::string advert_id;
  };

  void on_connected(agent::Agent& self, const agent::Connection& conn, agent::Effects& fx);
  void handle(agent::Agent& self, const agent::Connection& conn, const agent::Message& msg, agent::Effects& fx);
  void handle_decision(const agent::Message& msg);
  void send(HandshakeSession& s, const std::string& type, json body, agent::Effects& fx);
  void record(HandshakeSession& s, const std::string& event, const std::string& direction,
              const std::string& digest = "", json detail = nullptr);
  void set_state(HandshakeSession& s, SessionState st);
  void send_reward(HandshakeSession& s, agent::Effects& fx);
  void persist(const HandshakeSession& s);
  const Project& project_for(const HandshakeSession& s) const;

  agent::Agent& agent_;
  DayClock today_;
  credentials::HolderService holder_;
  credentials::NonceBook nonces_;
  std::string reward_cred_def_id_;
  std::map<std::string, Project> projects_;
  std::map<std::string, json> decisions_;
  std::map<std::string, HandshakeSession> sessions_;  // by thread id
  std::map<std::string, credentials::PresentationRequest> eligibility_requests_;
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::size_t rewards_issued_ = 0;
  std::function<void(credentials::PresentationRequest&)> tamper_;
  std::optional<std::int64_t> reward_override_;
};

struct OwnerPolicy {
  bool auto_accept_terms = true;
  bool auto_approve_eligibility = true;
  bool auto_consent = true;
  bool decline_eligibility = false;
  // Attributes released when consenting automatically; nullopt = everything requested.
  std::optional<std::vector<std::string>> selection = std::nullopt;
};

// Data owner's side: biomarker credentials, sessions, rewards.
class DataOwner {
 public:
  DataOwner(agent::Agent& agent, std::string trusted_ethics_cred_def, DayClock today, OwnerPolicy policy = {});

  agent::Agent& agent() { return agent_; }
  credentials::HolderService& holder() { return holder_; }
  void set_policy(OwnerPolicy p) { policy_ = std::move(p); }
  const OwnerPolicy& policy() const { return policy_; }

  // Connects to the advert's invitation as "anonymous". The session id is
  // the new connection id.
  std::string start(const Advert& advert, agent::Effects& fx);
  void accept_terms(const std::string& session_id, agent::Effects& fx);
  void approve_eligibility(const std::string& session_id, agent::Effects& fx);
  void decline_eligibility(const std::string& session_id, agent::Effects& fx);
  // Throws omic::Error("bad-selection") for attributes outside the request
  // and ("out-of-order") outside ELIGIBILITY_PROVEN.
  void consent(const std::string& session_id, const std::vector<std::string>& selected, agent::Effects& fx);
  void abort(const std::string& session_id, const std::string& reason, agent::Effects& fx);

  const std::map<std::string, HandshakeSession>& sessions() const { return sessions_; }
  const HandshakeSession& session(const std::string& id) const;
  std::vector<json> rewards() const;

  // Rebuilds sessions from the wallet after a restore.
  void reload();

 private:
  void handle(agent::Agent& self, const agent::Connection& conn, const agent::Message& msg, agent::Effects& fx);
  void on_connected(agent::Agent& self, const agent::Connection& conn, agent::Effects& fx);
  HandshakeSession& session_mut(const std::string& id);
  void send(HandshakeSession& s, const std::string& type, json body, agent::Effects& fx);
  void record(HandshakeSession& s, const std::string& event, const std::string& direction,
              const std::string& digest = "", json detail = nullptr);
  void set_state(HandshakeSession& s, SessionState st);
  void abort_session(HandshakeSession& s, const std::string& reason, agent::Effects& fx);
  void send_ethics_request(HandshakeSession& s, agent::Effects& fx);
  void answer_eligibility(HandshakeSession& s, agent::Effects& fx);
  void send_package(HandshakeSession& s, agent::Effects& fx);
  void persist(const HandshakeSession& s);
  Advert advert_for(const HandshakeSession& s) const;
  // Held credentials ordered for create_presentation, which takes the last
  // match: shown elsewhere first, then unused, then this session's own.
  std::vector<credentials::HeldCredential> ordered_credentials(const HandshakeSession& s) const;
  void note_presented(const HandshakeSession& s, const credentials::Presentation& p);

  agent::Agent& agent_;
  std::string ethics_cred_def_;
  DayClock today_;
  OwnerPolicy policy_;
  credentials::HolderService holder_;
  credentials::NonceBook nonces_;
  std::map<std::string, HandshakeSession> sessions_;  // by connection id
  std::map<std::string, Advert> adverts_;             // by session id
  std::map<std::string, credentials::PresentationRequest> ethics_requests_;
};

}  // namespace omic::exchange
