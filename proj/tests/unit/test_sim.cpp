#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include <httplib.h>

#include "omic/error.hpp"
#include "omic/sim/audit.hpp"
#include "omic/sim/scenario.hpp"
#include "omic/sim/service.hpp"

using namespace omic;
using namespace omic::sim;

namespace {

ScenarioConfig scenario(const std::string& name) {
  return ScenarioConfig::load(std::filesystem::path(OMIC_SCENARIO_DIR) / (name + ".json"));
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("omic-sim-" + name);
  std::filesystem::remove_all(d);
  return d;
}

std::vector<std::string> states(const ScenarioResult& r) {
  std::vector<std::string> out;
  for (const auto& s : r.summary["sessions"]) out.push_back(s["state"]);
  return out;
}

}  // namespace

TEST(Scenario, HappyPathRewardsBothOwners) {
  const auto dir = temp_dir("happy");
  const auto r = run_scenario(scenario("happy_path"), dir);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(states(r), (std::vector<std::string>{"REWARDED", "REWARDED"}));
  for (auto f : {"transcript.jsonl", "blocks.jsonl", "genesis.jsonl", "board.jsonl", "wire.jsonl", "sentinels.json",
                 "summary.json", "views/Uni-Lab.jsonl"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_TRUE(ledger::verify_chain_lines(ledger::read_lines(dir / "blocks.jsonl")).ok);
  EXPECT_EQ(file_digest(ledger::read_lines(dir / "transcript.jsonl")), r.transcript_digest);
}

TEST(Scenario, SameSeedSameDigests) {
  const auto a = run_scenario(scenario("happy_path"));
  const auto b = run_scenario(scenario("happy_path"));
  EXPECT_EQ(a.transcript_digest, b.transcript_digest);
  EXPECT_EQ(a.block_log_digest, b.block_log_digest);
  auto cfg = scenario("happy_path");
  cfg.world.seed += 1;
  const auto c = run_scenario(cfg);
  EXPECT_NE(a.transcript_digest, c.transcript_digest);
}

TEST(Scenario, CrashedLeaderStillCompletes) {
  const auto r = run_scenario(scenario("crash_leader"));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.summary["rewarded"], 2);
  EXPECT_TRUE(r.summary["chains_consistent"].get<bool>());
}

TEST(Scenario, ExpiryAndRevocation) {
  const auto e = run_scenario(scenario("expired"));
  EXPECT_TRUE(e.ok);
  EXPECT_EQ(e.summary["sessions"][0]["abort_reason"], "expired");
  const auto r = run_scenario(scenario("revocation"));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(states(r), (std::vector<std::string>{"REWARDED", "ABORTED", "ABORTED"}));
}

TEST(Scenario, RecoveryActions) {
  const auto r = run_scenario(scenario("recovery"));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.actions.back().detail["error"], "insufficient-shares");
}

TEST(Scenario, WrongExpectationFailsTheRun) {
  auto cfg = scenario("happy_path");
  cfg.script.back()["expect"] = "ABORTED";
  const auto r = run_scenario(cfg);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.actions.back().ok);
}

TEST(Scenario, ValidationRejectsUnknownActors) {
  auto cfg = scenario("happy_path");
  cfg.script.push_back({{"action", "handshake"}, {"owner", "Zed"}, {"project", "lipid-2025"}});
  try {
    ScenarioRunner runner(cfg);
    FAIL() << "accepted a script naming an unknown owner";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unknown-actor");
  }
  cfg = scenario("happy_path");
  cfg.script.push_back({{"action", "teleport"}});
  EXPECT_THROW(ScenarioRunner{cfg}, Error);
  EXPECT_THROW(ScenarioConfig::from_json(json::array()), Error);
}

TEST(PhiScan, CleanRunPlantedControlAndEmptyLog) {
  const auto clean = temp_dir("phi-clean");
  run_scenario(scenario("happy_path"), clean);
  EXPECT_TRUE(phi_scan_artifacts(clean).empty());

  const auto planted = temp_dir("phi-planted");
  run_scenario(scenario("phi_control"), planted);
  const auto findings = phi_scan_artifacts(planted);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].location.rfind("block ", 0), 0u);

  EXPECT_TRUE(phi_scan({}, {}, {"SMP-00"}).empty());
  const auto f = phi_scan({}, {R"({"advert_id":"ad1","title":"SMP-00 study"})"}, {"SMP-00"});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].location, "advert ad1");
}

TEST(Unlinkability, DistinctCredentialsShareOnlyPublicIds) {
  const auto dir = temp_dir("unlink");
  ASSERT_TRUE(run_scenario(scenario("unlink"), dir).ok);
  const auto rep = unlinkability_audit_artifacts(dir);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.violations.empty());
  EXPECT_TRUE(rep.known_limitation.empty());
  for (const auto& o : rep.public_overlap) EXPECT_EQ(o["kind"], "cred-def-id");
}

TEST(Unlinkability, SameCredentialIsKnownLimitation) {
  const auto dir = temp_dir("unlink-same");
  ASSERT_TRUE(run_scenario(scenario("unlink_same_credential"), dir).ok);
  const auto rep = unlinkability_audit_artifacts(dir);
  EXPECT_TRUE(rep.pass);
  ASSERT_EQ(rep.known_limitation.size(), 1u);
  EXPECT_EQ(rep.known_limitation[0]["kind"], "revocation-handle");
}

TEST(Unlinkability, SingleResearcherIsVacuousAndReuseIsCaught) {
  const auto dir = temp_dir("unlink-single");
  run_scenario(scenario("happy_path"), dir);
  const auto rep = unlinkability_audit_artifacts(dir);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.public_overlap.empty());

  // The same pairwise DID shown to two researchers is a violation.
  const json e = {{"label", "anonymous"}, {"their_did", "did:omic:same"}, {"message", json::object()}};
  const auto bad = unlinkability_audit({{"R1", {e}}, {"R2", {e}}});
  EXPECT_FALSE(bad.pass);
  ASSERT_EQ(bad.violations.size(), 1u);
  EXPECT_EQ(bad.violations[0]["kind"], "pairwise-did");
  // Named counterparties are not owners and are ignored.
  auto named = e;
  named["label"] = "MYco";
  EXPECT_TRUE(unlinkability_audit({{"R1", {named}}, {"R2", {named}}}).pass);
}

namespace {

struct Served {
  std::mutex mu;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  ~Served() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
};

json parse(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST(Service, OwnerEndpoints) {
  auto cfg = scenario("happy_path");
  cfg.script.resize(4);  // issue, issue, apply, publish
  cfg.owners[0].second = {{"auto_approve_eligibility", false}, {"auto_consent", false}};
  cfg.guardians = {"Mum", "Dad", "Sis"};
  ScenarioRunner runner(cfg);
  ASSERT_TRUE(runner.run().ok);
  Served s;
  OwnerService owner(runner.world(), "Ann", s.mu);
  owner.mount(s.server);
  s.start();
  httplib::Client c("127.0.0.1", s.port);

  auto projects = c.Get("/projects");
  ASSERT_TRUE(projects);
  ASSERT_EQ(parse(projects).size(), 1u);
  EXPECT_EQ(parse(c.Get("/projects?org_type=pharma")).size(), 0u);
  const auto advert_id = parse(projects)[0]["advert_id"].get<std::string>();
  auto creds = parse(c.Get("/credentials"));
  ASSERT_EQ(creds.size(), 1u);
  EXPECT_FALSE(creds[0]["revoked"].get<bool>());

  auto started = c.Post("/sessions", json{{"advert_id", advert_id}}.dump(), "application/json");
  ASSERT_EQ(started->status, 201);
  const auto sid = parse(started)["id"].get<std::string>();
  auto mid = parse(c.Get("/sessions/" + sid));
  EXPECT_EQ(mid["state"], "ETHICS_VERIFIED");
  EXPECT_EQ(mid["ethics_report"]["overall"], "accept");
  EXPECT_FALSE(mid["ethics_report"]["trace"].empty());
  EXPECT_EQ(c.Get("/sessions/nope")->status, 404);

  auto approved = c.Post("/sessions/" + sid + "/eligibility-approve", "", "application/json");
  ASSERT_EQ(approved->status, 200);
  EXPECT_EQ(parse(approved)["state"], "ELIGIBILITY_PROVEN");
  auto bad = c.Post("/sessions/" + sid + "/consent", json{{"selected_attrs", {"sample_id"}}}.dump(), "application/json");
  EXPECT_EQ(bad->status, 422);
  EXPECT_EQ(parse(bad)["error"], "bad-selection");
  auto ok = c.Post("/sessions/" + sid + "/consent", json{{"selected_attrs", {"hba1c"}}}.dump(), "application/json");
  ASSERT_EQ(ok->status, 200);
  EXPECT_EQ(parse(ok)["state"], "REWARDED");
  EXPECT_EQ(parse(ok)["selected"], json({"hba1c"}));
  auto again = c.Post("/sessions/" + sid + "/consent", json{{"selected_attrs", json::array()}}.dump(), "application/json");
  EXPECT_EQ(again->status, 409);
  auto rewards = parse(c.Get("/rewards"));
  ASSERT_EQ(rewards.size(), 1u);

  auto badk = c.Post("/recovery/config", json{{"guardians", {"Mum", "Dad"}}, {"k", 3}}.dump(), "application/json");
  EXPECT_EQ(badk->status, 422);
  auto cfgd = c.Post("/recovery/config", json{{"guardians", {"Mum", "Dad", "Sis"}}, {"k", 2}, {"passphrase", "pw"}}.dump(),
                     "application/json");
  ASSERT_EQ(cfgd->status, 200);
  const auto before = runner.world().agent("Ann").wallet().to_json();
  auto one = c.Post("/recovery/restore", json{{"guardians", {"Dad"}}}.dump(), "application/json");
  EXPECT_EQ(one->status, 422);
  auto two = c.Post("/recovery/restore", json{{"guardians", {"Dad", "Sis"}}}.dump(), "application/json");
  ASSERT_EQ(two->status, 200);
  EXPECT_EQ(runner.world().agent("Ann").wallet().to_json(), before);
  EXPECT_EQ(parse(c.Get("/sessions/" + sid))["state"], "REWARDED");

  EXPECT_EQ(c.Post("/sessions", "not json", "application/json")->status, 400);

  const auto wallet = temp_dir("wallet-flush");
  std::filesystem::create_directories(wallet);
  owner.flush(wallet / "ann.wallet", "pw");
  std::ifstream in(wallet / "ann.wallet", std::ios::binary);
  const std::string sealed((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(agent::wallet_load(crypto::as_bytes(sealed), "pw"), runner.world().agent("Ann").wallet());
}

TEST(Service, BoardEndpoints) {
  auto cfg = scenario("happy_path");
  cfg.script.resize(3);  // issue, issue, apply
  ScenarioRunner runner(cfg);
  ASSERT_TRUE(runner.run().ok);
  Served s;
  BoardService board(runner.world(), s.mu);
  board.mount(s.server);
  s.start();
  httplib::Client c("127.0.0.1", s.port);
  EXPECT_EQ(parse(c.Get("/adverts")).size(), 0u);

  auto& researcher = runner.world().researcher("Uni-Lab");
  const auto& project = runner.project("lipid-2025");
  const auto challenge = credentials::PresentationRequest::from_json(parse(c.Get("/adverts/challenge")));
  const auto stored = researcher.publish_via(
      project, challenge,
      [&](const exchange::Advert& a, const std::optional<credentials::Presentation>& p, const credentials::PresentationRequest&) {
        auto res = c.Post("/adverts", json{{"advert", a.to_json()}, {"certificate", p->to_json()}}.dump(),
                          "application/json");
        if (res->status != 201) throw Error(parse(res)["error"].get<std::string>(), "board refused");
        return exchange::Advert::from_json(parse(res));
      });
  EXPECT_FALSE(stored.advert_id.empty());
  EXPECT_EQ(parse(c.Get("/adverts?org_type=university")).size(), 1u);
  EXPECT_EQ(parse(c.Get("/adverts?org_type=government")).size(), 0u);

  // No certificate.
  auto none = c.Post("/adverts", json{{"advert", stored.to_json()}}.dump(), "application/json");
  EXPECT_EQ(none->status, 422);
  EXPECT_EQ(parse(none)["error"], "no-certificate");
}
