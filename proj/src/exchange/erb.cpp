#include "omic/exchange/erb.hpp"

#include "omic/error.hpp"

namespace omic::exchange {

using agent::Agent;
using agent::Connection;
using agent::Effects;
using agent::Message;

std::vector<ledger::AttributeSpec> ethics_schema_attributes() {
  return {{"project_id", "string", 0, 0},
          {"org_type", "string", 0, 0},
          {"approved_attrs_hash", "string", 0, 0},
          {"expiry", "int", 0, kExpiryVmax},
          {"reward_cap", "int", 0, kRewardCapVmax}};
}

ReviewDecision review_application(const EthicsApplication& app, const ReviewPolicy& policy,
                                  const std::vector<ReviewRule>& extra) {
  const auto& p = app.project;
  if (p.org_type.empty() || !kOrgTypes.count(p.org_type)) return {false, "missing-org-type"};
  if (p.criteria.empty()) return {false, "empty-criteria"};
  if (p.reward.amount > policy.reward_cap) return {false, "reward-exceeds-cap"};
  for (const auto& rule : extra) {
    if (auto why = rule(app)) return {false, *why};
  }
  return {true, ""};
}

EthicsBoard::EthicsBoard(Agent& agent, ReviewPolicy policy, DayClock today)
    : agent_(agent), policy_(policy), today_(std::move(today)) {
  agent_.on(
      std::string(kEthicsProtocol),
      [this](Agent& self, const Connection& c, const Message& m, Effects& fx) { handle(self, c, m, fx); },
      {"application"});
}

void EthicsBoard::setup() {
  if (!agent_.wallet().public_did) agent_.register_public_did("issuer");
  schema_id_ = credentials::define_schema(agent_, "ethics-certificate", "1.0", ethics_schema_attributes()).id;
  cred_def_id_ = credentials::publish_cred_def(agent_, schema_id_).cred_def_id;
  issuer_ = std::make_unique<credentials::IssuerService>(agent_, cred_def_id_);
}

void EthicsBoard::handle(Agent& self, const Connection& conn, const Message& msg, Effects& fx) {
  if (msg.type == agent::kProblemReport) return;
  if (!issuer_) throw Error("not-ready", "ethics board has no cred-def yet");
  const auto app = EthicsApplication::from_json(msg.body);
  const auto d = review_application(app, policy_, rules_);
  decisions_.push_back({{"project_id", app.project.project_id},
                        {"approved", d.approved},
                        {"reason", d.reason},
                        {"thread_id", msg.thread_id}});
  self.send(conn.id,
            agent::make_reply(msg, "decision",
                              {{"project_id", app.project.project_id}, {"approved", d.approved}, {"reason", d.reason}},
                              self.rng()),
            fx);
  if (!d.approved) return;
  const json values = {{"project_id", app.project.project_id},
                       {"org_type", app.project.org_type},
                       {"approved_attrs_hash", app.project.approved_attrs_hash().hex()},
                       {"expiry", today_() + policy_.expiry_days},
                       {"reward_cap", policy_.reward_cap}};
  const auto thread = issuer_->offer(conn.id, values, fx);
  issued_.emplace(app.project.project_id, thread);
}

std::vector<ledger::Receipt> EthicsBoard::revoke(const std::string& project_id) {
  std::vector<ledger::Receipt> out;
  auto [lo, hi] = issued_.equal_range(project_id);
  if (lo == hi) throw Error("unknown-project", "no certificate issued for " + project_id);
  for (auto it = lo; it != hi; ++it) {
    if (issuer_->handle_for(it->second)) out.push_back(issuer_->revoke(it->second));
  }
  return out;
}

}  // namespace omic::exchange

namespace omic::exchange {

credentials::PresentationRequest ethics_request(const std::string& ethics_cred_def_id, std::int64_t today,
                                               const std::string& purpose_id, crypto::Drbg& rng) {
  return credentials::make_request(
      {{ethics_cred_def_id, {"project_id", "org_type", "approved_attrs_hash", "reward_cap"}, {{"expiry", today}}}},
      purpose_id, rng);
}

credentials::VerificationReport verify_ethics(const credentials::Presentation& p,
                                              const credentials::PresentationRequest& request,
                                              const ledger::LedgerState& state, credentials::NonceBook& nonces,
                                              const EthicsExpectation& expect) {
  auto report = credentials::verify_presentation(p, request, state, nonces);
  if (!report.accept) return report;
  auto add = [&](const std::string& check, bool ok, const std::string& good, const std::string& bad) {
    report.trace.push_back({check, ok, ok ? good : bad});
    if (!ok) report.accept = false;
  };
  const auto& rv = report.revealed;
  auto value = [&](const std::string& k) {
    auto it = rv.find(k);
    return it == rv.end() ? std::string() : it->second;
  };
  add("project", value("project_id") == expect.project_id, "The certificate was issued for this project.",
      "The certificate names project '" + value("project_id") + "', not '" + expect.project_id + "'.");
  add("org-type", value("org_type") == expect.org_type,
      "The certificate confirms the organization type '" + expect.org_type + "'.",
      "The certificate says '" + value("org_type") + "' but the project claims '" + expect.org_type + "'.");
  add("criteria", value("approved_attrs_hash") == expect.approved_attrs_hash.hex(),
      "The ethics board approved exactly the data this project asks for.",
      "The project asks for data the ethics board did not approve.");
  if (!report.accept) report.revealed.clear();
  return report;
}

std::string ethics_failure_reason(const credentials::VerificationReport& report) {
  const auto f = report.first_failure();
  if (f == "predicate") return "expired";
  if (f == "revocation") return "revoked";
  return f;
}

}  // namespace omic::exchange
