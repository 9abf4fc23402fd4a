#pragma once

#include <filesystem>

#include "omic/sim/world.hpp"

namespace omic::sim {

// Scenario file, JSON. See README for the full schema.
//   seed, validators, today, review {reward_cap, expiry_days}, panel [...]
//   actors {researchers: [name], owners: [{name, policy}], guardians: [name]}
//   projects [{researcher, project_id, title, org_type, purpose,
//              consent_terms, reward, reveal, predicates}]
//   faults {crash: [validator index]}   applied before any actor exists
//   script [{action, ...}]
struct ScenarioConfig {
  WorldConfig world;
  std::vector<std::string> researchers;
  std::vector<std::pair<std::string, json>> owners;  // name, policy
  std::vector<std::string> guardians;
  std::vector<json> projects;
  std::vector<std::size_t> crash_at_start;
  std::vector<json> script;
  json serve = json::object();

  static ScenarioConfig from_json(const json& j);
  static ScenarioConfig load(const std::filesystem::path& path);
  // Throws omic::Error("unknown-actor"), ("unknown-project") or
  // ("bad-action") for scripts that cannot run.
  void validate() const;
};

exchange::OwnerPolicy owner_policy_from_json(const json& j);

struct ActionResult {
  std::size_t index = 0;
  std::string action;
  bool ok = false;
  json detail = json::object();
};

struct ScenarioResult {
  bool ok = false;
  std::vector<ActionResult> actions;
  json summary;
  std::string transcript_digest;  // hex SHA-256 of transcript.jsonl
  std::string block_log_digest;   // hex SHA-256 of blocks.jsonl
};

class ScenarioRunner {
 public:
  explicit ScenarioRunner(ScenarioConfig config);

  ScenarioResult run();
  // Writes every artifact; run() first.
  void write_artifacts(const std::filesystem::path& dir) const;

  World& world() { return *world_; }
  const ScenarioConfig& config() const { return config_; }
  const exchange::Advert& advert(const std::string& project_id) const;
  const exchange::ResearchProject& project(const std::string& project_id) const;
  // Session ids per owner, in the order the script started them.
  const std::map<std::string, std::vector<std::string>>& owner_sessions() const { return owner_sessions_; }

  std::vector<std::string> transcript_lines() const;
  std::vector<std::string> block_lines() const;
  std::vector<std::string> sentinels() const;
  std::map<std::string, std::vector<json>> researcher_views() const;

 private:
  json run_action(const json& a);
  json act_issue(const json& a);
  json act_handshake(const json& a);
  json act_configure_recovery(const json& a);
  json act_recover(const json& a);
  json act_plant_sentinel(const json& a);

  ScenarioConfig config_;
  std::unique_ptr<World> world_;
  std::map<std::string, exchange::ResearchProject> projects_;
  std::map<std::string, std::string> project_owner_;  // project -> researcher
  std::map<std::string, exchange::Advert> adverts_;
  std::map<std::string, std::vector<std::string>> owner_sessions_;
  std::map<std::string, std::vector<std::string>> sample_ids_;
  struct Recovery {
    exchange::RecoveryConfig config;
    std::array<std::uint8_t, 32> key{};
    crypto::Bytes salt;
  };
  std::map<std::string, Recovery> recovery_;
  ScenarioResult result_;
};

// Loads, runs and, when `out` is non-empty, writes artifacts.
ScenarioResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out = {});

std::string file_digest(const std::vector<std::string>& lines);

}  // namespace omic::sim
