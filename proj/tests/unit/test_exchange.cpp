#include <gtest/gtest.h>

#include "omic/error.hpp"
#include "omic/sim/world.hpp"

using namespace omic;
using namespace omic::exchange;
using sim::World;
using sim::WorldConfig;

namespace {

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

ResearchProject lipid_study(World& w, const std::string& id = "lipid-2025", std::int64_t reward = 50) {
  ResearchProject p;
  p.project_id = id;
  p.title = "Cholesterol and long-term glucose";
  p.org_type = "university";
  p.purpose = "Study how LDL relates to HbA1c in adults.";
  p.criteria = {{w.myco().cred_def_id(), {"ldl", "hba1c"}, {{"ldl", 20}}}};
  p.consent_terms = "Your LDL and HbA1c values are used only for this study and deleted after two years.";
  p.reward = {"honorarium", reward, "USD"};
  return p;
}

std::vector<BiomarkerRecord> panel(const std::string& ldl, const std::string& hba1c) {
  return {{"ldl", ldl, "mmol/L", "2025-09-01"}, {"hba1c", hba1c, "%", "2025-09-01"}};
}

struct Exchange {
  World w{WorldConfig{.seed = 11}};

  Advert project(const std::string& researcher, const ResearchProject& p) {
    if (!w.has_agent(researcher)) w.add_researcher(researcher);
    w.apply_ethics(researcher, p);
    return w.publish(researcher, p);
  }
  DataOwner& owner(const std::string& name, const std::string& ldl = "3.1", OwnerPolicy policy = {}) {
    auto& o = w.add_owner(name, std::move(policy));
    w.issue_biomarkers(name, "SMP-" + name, panel(ldl, "5.4"));
    return o;
  }
  const HandshakeSession& researcher_side(const std::string& researcher, const std::string& project_id,
                                          std::size_t nth = 0) {
    std::size_t i = 0;
    for (const auto& [id, s] : w.researcher(researcher).sessions()) {
      if (s.project_id == project_id && i++ == nth) return s;
    }
    throw Error("missing", "no researcher session");
  }
};

std::vector<std::string> events(const HandshakeSession& s) {
  std::vector<std::string> out;
  for (const auto& e : s.transcript) out.push_back(e.event);
  return out;
}

}  // namespace

TEST(EthicsReview, DefaultPolicy) {
  World w(WorldConfig{.seed = 3});
  EthicsApplication app{"did:omic:x", lipid_study(w), "summary"};
  EXPECT_TRUE(review_application(app, {}).approved);
  app.project.reward.amount = 500;
  EXPECT_EQ(review_application(app, {}).reason, "reward-exceeds-cap");
  app.project.reward.amount = 50;
  app.project.org_type = "";
  EXPECT_EQ(review_application(app, {}).reason, "missing-org-type");
  app.project.org_type = "university";
  app.project.criteria.clear();
  EXPECT_EQ(review_application(app, {}).reason, "empty-criteria");
}

TEST(EthicsReview, RejectThenResubmit) {
  Exchange x;
  x.w.add_researcher("Uni");
  auto d = x.w.apply_ethics("Uni", lipid_study(x.w, "lipid-2025", 500));
  EXPECT_FALSE(d["approved"].get<bool>());
  EXPECT_EQ(d["reason"], "reward-exceeds-cap");
  EXPECT_FALSE(x.w.researcher("Uni").has_certificate("lipid-2025"));
  d = x.w.apply_ethics("Uni", lipid_study(x.w));
  EXPECT_TRUE(d["approved"].get<bool>());
  EXPECT_TRUE(x.w.researcher("Uni").has_certificate("lipid-2025"));
}

TEST(BulletinBoard, PublishDiscoverAndGatekeeping) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  ASSERT_EQ(x.w.board().list().size(), 1u);
  EXPECT_EQ(x.w.board().list("university")[0].advert_id, advert.advert_id);
  EXPECT_EQ(x.w.board().list("university")[0].org_type, "university");
  EXPECT_TRUE(x.w.board().list("pharma").empty());
  EXPECT_EQ(advert.advert_id.size(), 32u);
  EXPECT_EQ(advert.posted_at, 1);

  x.w.add_researcher("Pharma");
  auto p = lipid_study(x.w, "uncertified");
  p.org_type = "pharma";
  EXPECT_EQ(code_of([&] { x.w.publish("Pharma", p); }), "no-certificate");
  // A certificate for another project does not cover this one.
  x.w.apply_ethics("Pharma", lipid_study(x.w, "other"));
  auto q = lipid_study(x.w, "other");
  q.org_type = "pharma";
  EXPECT_EQ(code_of([&] { x.w.publish("Pharma", q); }), "certificate-rejected");
  EXPECT_EQ(x.w.board().list().size(), 1u);
  EXPECT_EQ(x.w.board().rejections().size(), 2u);
}

TEST(Myco, BundleIssuanceAndErrors) {
  Exchange x;
  auto& o = x.owner("Ann");
  auto held = o.holder().credentials();
  ASSERT_EQ(held.size(), 1u);
  EXPECT_EQ(held[0].credential.attributes.size(), 3u);  // sample id + two biomarkers
  EXPECT_EQ(held[0].holder_tokens.size(), 2u);
  EXPECT_EQ(held[0].encoded.at("ldl"), 31);
  const auto conn = x.w.connect("MYco", "Ann").first;
  agent::Effects fx;
  EXPECT_EQ(code_of([&] { x.w.myco().issue(conn, "S", {{"weight", "80", "kg", ""}}, fx); }), "unknown-biomarker");
  EXPECT_EQ(code_of([&] { x.w.myco().issue(conn, "S", {{"ldl", "3.1", "mg/dL", ""}}, fx); }), "unit-mismatch");
  EXPECT_EQ(code_of([&] { x.w.myco().issue(conn, "S", {{"ldl", "3.1", "mmol/L", ""}}, fx); }), "missing-attribute");
  EXPECT_EQ(code_of([&] { x.w.myco().issue(conn, "S", panel("30.0", "5.4"), fx); }), "out-of-range");
  EXPECT_TRUE(fx.out.empty());
}

TEST(Handshake, HappyPath) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann");
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  const auto& s = x.w.owner("Ann").session(sid);
  EXPECT_EQ(s.state, SessionState::kRewarded);
  auto ev = events(s);
  ASSERT_GE(ev.size(), 3u);
  EXPECT_EQ(ev[0], "connect");
  EXPECT_EQ(ev[1], "terms");
  EXPECT_EQ(ev[2], "ethics-offer");
  EXPECT_LT(s.index_of("terms"), s.index_of("eligibility-request"));
  EXPECT_LT(s.index_of("eligibility-request"), s.index_of("consent"));
  EXPECT_LT(s.index_of("consent"), s.index_of("data"));
  EXPECT_LT(s.index_of("data"), s.index_of("reward"));
  EXPECT_EQ(s.ethics_report["overall"], "accept");
  EXPECT_EQ(s.reward_cap, 50);

  const auto& r = x.researcher_side("Uni", "lipid-2025");
  EXPECT_EQ(r.state, SessionState::kRewarded);
  EXPECT_EQ(r.eligibility_report["overall"], "accept");
  EXPECT_TRUE(r.eligibility_report["revealed"].empty());
  EXPECT_EQ(x.w.researcher("Uni").received_data().at(r.id).at("ldl"), "3.1");
  EXPECT_EQ(x.w.researcher("Uni").received_data().at(r.id).at("hba1c"), "5.4");
  EXPECT_EQ(x.w.researcher("Uni").rewards_issued(), 1u);

  const auto rewards = x.w.owner("Ann").rewards();
  ASSERT_EQ(rewards.size(), 1u);
  EXPECT_EQ(rewards[0]["amount"], 50);
  const auto consent = ConsentRecord::from_json(s.consent);
  EXPECT_TRUE(consent.verify());
  EXPECT_TRUE(consent.verify_countersignature());

  // The researcher only ever saw the owner as "anonymous".
  const auto& conn = x.w.agent("Uni").connection(r.connection_id);
  EXPECT_EQ(conn.label, "anonymous");
  // The eligibility presentation carries no attribute value.
  for (const auto& m : x.w.agent("Uni").received()) {
    if (m["message"]["type"] == "eligibility-presentation") {
      const auto text = m["message"].dump();
      EXPECT_EQ(text.find("\"3.1\""), std::string::npos);
      EXPECT_EQ(text.find("SMP-Ann"), std::string::npos);
    }
  }
}

TEST(Handshake, TermsMismatchAborts) {
  Exchange x;
  auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann");
  advert.terms_hash = crypto::hash(std::string_view("other terms")).hex();
  agent::Effects fx;
  const auto sid = x.w.owner("Ann").start(advert, fx);
  x.w.post(std::move(fx), x.w.agent("Ann"));
  x.w.run();
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kAborted);
  EXPECT_EQ(x.w.owner("Ann").session(sid).abort_reason, "terms-mismatch");
  EXPECT_EQ(x.researcher_side("Uni", "lipid-2025").state, SessionState::kAborted);
}

TEST(Handshake, OwnerAbortsAtTerms) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann", "3.1", {.auto_accept_terms = false});
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kTermsPresented);
  agent::Effects fx;
  x.w.owner("Ann").abort(sid, "not-interested", fx);
  x.w.post(std::move(fx), x.w.agent("Ann"));
  x.w.run();
  const auto& r = x.researcher_side("Uni", "lipid-2025");
  EXPECT_EQ(r.state, SessionState::kAborted);
  EXPECT_EQ(r.abort_reason, "not-interested");
  EXPECT_LT(r.index_of("ethics-presentation"), 0);
  EXPECT_TRUE(x.w.researcher("Uni").received_data().empty());
}

TEST(Handshake, AcceptTermsExplicitly) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann", "3.1", {.auto_accept_terms = false});
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  agent::Effects fx;
  x.w.owner("Ann").accept_terms(sid, fx);
  x.w.post(std::move(fx), x.w.agent("Ann"));
  x.w.run();
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kRewarded);
}

TEST(Handshake, ExpiredCertificate) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann");
  x.w.set_today(x.w.today() + 366);
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  const auto& s = x.w.owner("Ann").session(sid);
  EXPECT_EQ(s.state, SessionState::kAborted);
  EXPECT_EQ(s.abort_reason, "expired");
  EXPECT_TRUE(s.ethics_report.is_null() || s.ethics_report["overall"] == "reject");
}

TEST(Handshake, RevokedCertificate) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann");
  x.owner("Ben");
  const auto first = x.w.start_session("Ann", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ann").session(first).state, SessionState::kRewarded);
  x.w.erb().revoke("lipid-2025");
  const auto second = x.w.start_session("Ben", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ben").session(second).state, SessionState::kAborted);
  EXPECT_EQ(x.w.owner("Ben").session(second).abort_reason, "revoked");
  EXPECT_EQ(x.w.owner("Ann").session(first).state, SessionState::kRewarded);
}

TEST(Handshake, IneligibleOwner) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann", "1.5");
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kAborted);
  EXPECT_EQ(x.w.owner("Ann").session(sid).abort_reason, "ineligible");
  const auto& r = x.researcher_side("Uni", "lipid-2025");
  EXPECT_EQ(r.state, SessionState::kAborted);
  EXPECT_EQ(r.abort_reason, "ineligible");
  EXPECT_LT(r.index_of("eligibility-presentation"), 0);
  EXPECT_EQ(x.w.owner("Ann").rewards().size(), 0u);
}

TEST(Handshake, OverReachAndDecline) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann");
  x.owner("Ben", "3.1", {.decline_eligibility = true});
  const auto declined = x.w.start_session("Ben", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ben").session(declined).abort_reason, "declined");

  x.w.researcher("Uni").set_eligibility_tamper([](credentials::PresentationRequest& r) {
    r.requested[0].predicates.push_back({"hba1c", 10});
  });
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kAborted);
  EXPECT_EQ(x.w.owner("Ann").session(sid).abort_reason, "over-reach");
}

TEST(Handshake, EligibilityNeedsApproval) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann", "3.1", {.auto_approve_eligibility = false});
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kEthicsVerified);
  agent::Effects fx;
  x.w.owner("Ann").approve_eligibility(sid, fx);
  x.w.post(std::move(fx), x.w.agent("Ann"));
  x.w.run();
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kRewarded);
}

TEST(Consent, SubsetAndEmptySelection) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann", "3.1", {.selection = std::vector<std::string>{"ldl"}});
  x.owner("Ben", "3.1", {.selection = std::vector<std::string>{}});
  const auto a = x.w.start_session("Ann", advert.advert_id);
  const auto b = x.w.start_session("Ben", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ann").session(a).state, SessionState::kRewarded);
  EXPECT_EQ(x.w.owner("Ben").session(b).state, SessionState::kRewarded);
  const auto& data = x.w.researcher("Uni").received_data();
  const auto& ra = x.researcher_side("Uni", "lipid-2025", 0);
  const auto& rb = x.researcher_side("Uni", "lipid-2025", 1);
  const auto& da = data.at(ra.selected.empty() ? rb.id : ra.id);
  const auto& db = data.at(ra.selected.empty() ? ra.id : rb.id);
  EXPECT_EQ(da.size(), 1u);
  EXPECT_EQ(da.at("ldl"), "3.1");
  EXPECT_TRUE(db.empty());
}

TEST(Consent, SelectionOutsideRequest) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann", "3.1", {.auto_consent = false});
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  auto& o = x.w.owner("Ann");
  EXPECT_EQ(o.session(sid).state, SessionState::kEligibilityProven);
  agent::Effects fx;
  EXPECT_EQ(code_of([&] { o.consent(sid, {"ldl", "sample_id"}, fx); }), "bad-selection");
  EXPECT_EQ(o.session(sid).state, SessionState::kEligibilityProven);
  o.consent(sid, {"hba1c"}, fx);
  x.w.post(std::move(fx), x.w.agent("Ann"));
  x.w.run();
  EXPECT_EQ(o.session(sid).state, SessionState::kRewarded);
}

TEST(DataTransfer, PurposeBinding) {
  Exchange x;
  const auto p = lipid_study(x.w);
  const auto advert = x.project("Uni", p);
  x.owner("Ann");
  x.w.start_session("Ann", advert.advert_id);
  const auto& r = x.researcher_side("Uni", "lipid-2025");
  std::optional<DataPackage> pkg;
  for (const auto& m : x.w.agent("Uni").received()) {
    if (m["message"]["type"] == "data") pkg = DataPackage::from_json(m["message"]["body"]);
  }
  ASSERT_TRUE(pkg);
  const auto consent = ConsentRecord::from_json(r.consent);
  const auto& state = x.w.client().state();
  EXPECT_TRUE(verify_data_package(*pkg, consent, p.criteria, "lipid-2025", state).accept);
  const auto other = verify_data_package(*pkg, consent, p.criteria, "insurance-pricing", state);
  EXPECT_FALSE(other.accept);
  EXPECT_TRUE(other.revealed.empty());
  auto tampered = *pkg;
  tampered.presentation.credentials[0].revealed[0].value = "9.9";
  EXPECT_FALSE(verify_data_package(tampered, consent, p.criteria, "lipid-2025", state).accept);
}

TEST(Reward, BeforeTransferIsRefused) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann", "3.1", {.auto_consent = false});
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  const auto before = x.w.owner("Ann").session(sid).to_json();
  const auto& r = x.researcher_side("Uni", "lipid-2025");
  agent::Effects fx;
  x.w.researcher("Uni").force_reward(r.id, fx);
  x.w.post(std::move(fx), x.w.agent("Uni"));
  x.w.run();
  EXPECT_EQ(x.w.owner("Ann").session(sid).to_json(), before);
  EXPECT_GE(r.index_of("problem-report"), 0);
  EXPECT_EQ(r.transcript.back().detail["code"], "out-of-order");
  EXPECT_TRUE(x.w.owner("Ann").rewards().empty());
}

TEST(Reward, OverCapIsRejected) {
  Exchange x;
  const auto advert = x.project("Uni", lipid_study(x.w));
  x.owner("Ann");
  x.w.researcher("Uni").set_reward_amount(100);
  const auto sid = x.w.start_session("Ann", advert.advert_id);
  EXPECT_EQ(x.w.owner("Ann").session(sid).state, SessionState::kDataTransferred);
  EXPECT_TRUE(x.w.owner("Ann").rewards().empty());
  const auto& r = x.researcher_side("Uni", "lipid-2025");
  EXPECT_EQ(r.transcript.back().detail["code"], "reward-exceeds-cap");
  EXPECT_EQ(x.w.researcher("Uni").rewards_issued(), 0u);
}

TEST(Identity, PairwiseAcrossResearchers) {
  Exchange x;
  const auto a1 = x.project("Uni", lipid_study(x.w, "study-a"));
  const auto a2 = x.project("Gov", lipid_study(x.w, "study-b"));
  x.owner("Ann");
  x.w.start_session("Ann", a1.advert_id);
  x.w.start_session("Ann", a2.advert_id);
  const auto& s1 = x.researcher_side("Uni", "study-a");
  const auto& s2 = x.researcher_side("Gov", "study-b");
  const auto& c1 = x.w.agent("Uni").connection(s1.connection_id);
  const auto& c2 = x.w.agent("Gov").connection(s2.connection_id);
  EXPECT_NE(c1.their_did, c2.their_did);
  EXPECT_NE(c1.their_vk, c2.their_vk);
  EXPECT_EQ(c1.label, "anonymous");
  EXPECT_EQ(c2.label, "anonymous");
}

TEST(Recovery, TwoOfThreeGuardians) {
  Exchange x;
  x.owner("Ann");
  for (auto g : {"Mum", "Dad", "Sis"}) x.w.add_guardian(g);
  std::vector<std::string> conns;
  for (auto g : {"Mum", "Dad", "Sis"}) conns.push_back(x.w.connect(g, "Ann").second);
  auto& ann = x.w.agent("Ann");
  crypto::Drbg rng(5);
  const auto salt = rng.bytes(16);
  const auto key = agent::derive_wallet_key("correct horse", salt);
  agent::Effects fx;
  EXPECT_EQ(code_of([&] { configure_recovery(ann, conns, 4, key, fx); }), "bad-parameters");
  const auto cfg = configure_recovery(ann, conns, 2, key, fx);
  x.w.post(std::move(fx), ann);
  x.w.run();
  const auto sealed = agent::wallet_save_with_key(ann.wallet(), key, salt, rng);

  std::vector<crypto::SecretShare> shares;
  for (auto g : {"Mum", "Dad", "Sis"}) shares.push_back(*x.w.guardian(g).release(cfg.owner_ref));
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      std::vector<crypto::SecretShare> pair = {shares[i], shares[j]};
      const auto restored = recover_wallet(pair, sealed);
      EXPECT_EQ(restored, ann.wallet());
      EXPECT_EQ(restored.to_json().dump(), ann.wallet().to_json().dump());
    }
  }
  std::vector<crypto::SecretShare> one = {shares[0]};
  EXPECT_EQ(code_of([&] { recover_wallet(one, sealed); }), "insufficient-shares");
  auto bad = shares;
  bad[1].payload[3] ^= 0x01;
  std::vector<crypto::SecretShare> corrupted = {bad[0], bad[1]};
  EXPECT_EQ(code_of([&] { recover_wallet(corrupted, sealed); }), "checksum-mismatch");
  EXPECT_FALSE(x.w.guardian("Mum").release("nobody"));
}
