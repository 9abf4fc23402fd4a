#include "omic/sim/scenario.hpp"

#include <fstream>
#include <set>

#include "omic/credentials/schema.hpp"
#include "omic/error.hpp"
#include "omic/ledger/builders.hpp"

namespace omic::sim {

namespace {

const std::set<std::string> kActions = {"issue",       "apply",        "publish",
                                        "handshake",   "revoke",       "crash-node",
                                        "advance-days", "configure-recovery", "recover",
                                        "plant-sentinel"};

std::string str(const json& j, const char* key, const std::string& fallback = "") {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : fallback;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + p.string());
  for (const auto& l : lines) out << l << '\n';
}

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + p.string());
  out << j.dump(2) << '\n';
}

}  // namespace

exchange::OwnerPolicy owner_policy_from_json(const json& j) {
  exchange::OwnerPolicy p;
  if (!j.is_object()) return p;
  p.auto_accept_terms = j.value("auto_accept_terms", true);
  p.auto_approve_eligibility = j.value("auto_approve_eligibility", true);
  p.auto_consent = j.value("auto_consent", true);
  p.decline_eligibility = j.value("decline_eligibility", false);
  if (j.contains("selection")) p.selection = j["selection"].get<std::vector<std::string>>();
  return p;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error("bad-config", "scenario must be a JSON object");
  ScenarioConfig c;
  c.world.seed = j.value("seed", std::uint64_t{1});
  c.world.validators = j.value("validators", 4);
  c.world.today = j.value("today", c.world.today);
  if (j.contains("review")) {
    c.world.review.reward_cap = j["review"].value("reward_cap", c.world.review.reward_cap);
    c.world.review.expiry_days = j["review"].value("expiry_days", c.world.review.expiry_days);
  }
  if (j.contains("panel")) {
    c.world.panel.clear();
    for (const auto& b : j["panel"]) {
      c.world.panel.push_back({b.at("name").get<std::string>(), b.at("unit").get<std::string>(),
                               b.value("precision", 1), b.value("v_max", std::int64_t{1000})});
    }
  }
  const auto actors = j.value("actors", json::object());
  c.researchers = actors.value("researchers", std::vector<std::string>{});
  for (const auto& o : actors.value("owners", json::array())) {
    if (o.is_string()) {
      c.owners.emplace_back(o.get<std::string>(), json::object());
    } else {
      c.owners.emplace_back(o.at("name").get<std::string>(), o.value("policy", json::object()));
    }
  }
  c.guardians = actors.value("guardians", std::vector<std::string>{});
  c.projects = j.value("projects", std::vector<json>{});
  c.crash_at_start = j.value("faults", json::object()).value("crash", std::vector<std::size_t>{});
  c.script = j.value("script", std::vector<json>{});
  c.serve = j.value("serve", json::object());
  if (c.world.validators < 1) throw Error("bad-config", "need at least one validator");
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error("bad-config", e.what());
  }
}

void ScenarioConfig::validate() const {
  std::set<std::string> names = {"MYco", "ERB"}, rs, os, gs, ps;
  auto add = [&](std::set<std::string>& role, const std::string& n) {
    if (!names.insert(n).second) throw Error("bad-config", "duplicate actor " + n);
    role.insert(n);
  };
  for (const auto& n : researchers) add(rs, n);
  for (const auto& [n, p] : owners) add(os, n);
  for (const auto& n : guardians) add(gs, n);
  for (const auto& p : projects) {
    if (!rs.count(str(p, "researcher"))) throw Error("unknown-actor", "project researcher " + str(p, "researcher"));
    if (!ps.insert(str(p, "project_id")).second) throw Error("bad-config", "duplicate project " + str(p, "project_id"));
  }
  for (auto i : crash_at_start) {
    if (i >= static_cast<std::size_t>(world.validators)) throw Error("bad-config", "no validator " + std::to_string(i));
  }
  auto need = [](const std::set<std::string>& role, const std::string& n, const char* what) {
    if (!role.count(n)) throw Error("unknown-actor", std::string(what) + " " + n);
  };
  for (const auto& a : script) {
    const auto action = str(a, "action");
    if (!kActions.count(action)) throw Error("bad-action", "unknown action '" + action + "'");
    if (action == "issue" || action == "handshake" || action == "configure-recovery" || action == "recover" ||
        action == "plant-sentinel") {
      need(os, str(a, "owner"), "owner");
    }
    if (action == "apply" || action == "publish" || action == "handshake" || action == "revoke") {
      need(ps, str(a, "project"), "project");
    }
    if (action == "configure-recovery" || action == "recover") {
      for (const auto& g : a.value("guardians", std::vector<std::string>{})) need(gs, g, "guardian");
    }
    if (action == "crash-node" && a.value("node", std::size_t{0}) >= static_cast<std::size_t>(world.validators)) {
      throw Error("bad-action", "crash-node index out of range");
    }
  }
}

ScenarioRunner::ScenarioRunner(ScenarioConfig config) : config_(std::move(config)) {
  config_.validate();
  world_ = std::make_unique<World>(config_.world);
  for (auto i : config_.crash_at_start) world_->net().crash(i);
  for (const auto& n : config_.researchers) world_->add_researcher(n);
  for (const auto& [n, p] : config_.owners) world_->add_owner(n, owner_policy_from_json(p));
  for (const auto& n : config_.guardians) world_->add_guardian(n);

  const auto& panel = world_->config().panel;
  for (const auto& pj : config_.projects) {
    exchange::ResearchProject p;
    p.project_id = str(pj, "project_id");
    p.title = str(pj, "title", p.project_id);
    p.org_type = str(pj, "org_type");
    p.purpose = str(pj, "purpose");
    p.consent_terms = str(pj, "consent_terms");
    if (pj.contains("reward")) p.reward = exchange::reward_from_json(pj["reward"]);
    credentials::RequestedCredential rc;
    rc.cred_def_id = world_->myco().cred_def_id();
    rc.reveal = pj.value("reveal", std::vector<std::string>{});
    for (const auto& pr : pj.value("predicates", json::array())) {
      const auto attr = pr.at("attr").get<std::string>();
      std::int64_t threshold = 0;
      if (pr.contains("threshold")) {
        threshold = pr["threshold"].get<std::int64_t>();
      } else {
        auto it = std::find_if(panel.begin(), panel.end(), [&](const auto& b) { return b.name == attr; });
        if (it == panel.end()) throw Error("bad-config", "predicate on unknown biomarker " + attr);
        threshold = *credentials::canonicalize({attr, "int", it->precision, it->v_max}, pr.at("min")).encoded;
      }
      rc.predicates.push_back({attr, threshold});
    }
    p.criteria = {rc};
    project_owner_[p.project_id] = str(pj, "researcher");
    projects_.emplace(p.project_id, std::move(p));
  }
}

const exchange::Advert& ScenarioRunner::advert(const std::string& project_id) const {
  auto it = adverts_.find(project_id);
  if (it == adverts_.end()) throw Error("unknown-project", project_id + " is not published");
  return it->second;
}

const exchange::ResearchProject& ScenarioRunner::project(const std::string& project_id) const {
  auto it = projects_.find(project_id);
  if (it == projects_.end()) throw Error("unknown-project", project_id);
  return it->second;
}

ScenarioResult ScenarioRunner::run() {
  result_ = {};
  result_.ok = true;
  for (std::size_t i = 0; i < config_.script.size(); ++i) {
    const auto& a = config_.script[i];
    ActionResult r{i, str(a, "action"), false, json::object()};
    try {
      r.detail = run_action(a);
      r.ok = r.detail.value("ok", true);
    } catch (const Error& e) {
      r.detail = {{"ok", false}, {"error", e.code()}, {"message", e.what()}};
    }
    result_.ok = result_.ok && r.ok;
    result_.actions.push_back(std::move(r));
  }

  result_.transcript_digest = file_digest(transcript_lines());
  result_.block_log_digest = file_digest(block_lines());

  json sessions = json::array();
  std::size_t rewarded = 0;
  for (const auto& [owner, ids] : owner_sessions_) {
    for (const auto& id : ids) {
      const auto& s = world_->owner(owner).session(id);
      if (s.state == exchange::SessionState::kRewarded) ++rewarded;
      sessions.push_back({{"owner", owner},
                          {"session", id},
                          {"project", s.project_id},
                          {"state", exchange::to_string(s.state)},
                          {"abort_reason", s.abort_reason}});
    }
  }
  json actions = json::array();
  for (const auto& r : result_.actions) {
    actions.push_back({{"index", r.index}, {"action", r.action}, {"ok", r.ok}, {"detail", r.detail}});
  }
  const auto& chain = world_->net().reference().chain();
  result_.summary = {{"seed", config_.world.seed},
                     {"ok", result_.ok},
                     {"actions", actions},
                     {"sessions", sessions},
                     {"rewarded", rewarded},
                     {"height", chain.empty() ? 0 : chain.back().height},
                     {"chains_consistent", world_->net().chains_consistent()},
                     {"transcript_digest", result_.transcript_digest},
                     {"block_log_digest", result_.block_log_digest},
                     {"wire_messages", world_->bus().wire().size()},
                     {"delivery_failures", world_->bus().failures().size()}};
  return result_;
}

json ScenarioRunner::run_action(const json& a) {
  const auto action = str(a, "action");
  auto& w = *world_;
  if (action == "issue") return act_issue(a);
  if (action == "apply") {
    const auto& p = project(str(a, "project"));
    const auto d = w.apply_ethics(project_owner_.at(p.project_id), p);
    const bool approved = d.value("approved", false);
    const auto expect = str(a, "expect", "approved");
    bool ok = (expect == "approved") == approved;
    if (ok && a.contains("reason")) ok = d.value("reason", "") == str(a, "reason");
    return {{"ok", ok}, {"approved", approved}, {"reason", d.value("reason", "")}};
  }
  if (action == "publish") {
    const auto& p = project(str(a, "project"));
    const auto expect = str(a, "expect", "published");
    try {
      const auto ad = w.publish(project_owner_.at(p.project_id), p);
      adverts_[p.project_id] = ad;
      return {{"ok", expect == "published"}, {"advert_id", ad.advert_id}};
    } catch (const Error& e) {
      return {{"ok", expect == e.code()}, {"error", e.code()}};
    }
  }
  if (action == "handshake") return act_handshake(a);
  if (action == "revoke") {
    const auto receipts = w.erb().revoke(str(a, "project"));
    json heights = json::array();
    for (const auto& r : receipts) heights.push_back(r.height);
    return {{"ok", !receipts.empty()}, {"heights", heights}};
  }
  if (action == "crash-node") {
    const auto node = a.value("node", std::size_t{0});
    w.net().crash(node);
    return {{"ok", true}, {"node", node}};
  }
  if (action == "advance-days") {
    w.set_today(w.today() + a.value("days", std::int64_t{1}));
    return {{"ok", true}, {"today", w.today()}};
  }
  if (action == "configure-recovery") return act_configure_recovery(a);
  if (action == "recover") return act_recover(a);
  if (action == "plant-sentinel") return act_plant_sentinel(a);
  throw Error("bad-action", action);
}

json ScenarioRunner::act_issue(const json& a) {
  const auto owner = str(a, "owner");
  auto& ids = sample_ids_[owner];
  auto rng = crypto::Drbg(config_.world.seed).fork("sentinel:" + owner + ":" + std::to_string(ids.size()));
  const auto sample = "SMP-" + crypto::to_hex(rng.bytes(8));
  std::vector<exchange::BiomarkerRecord> records;
  for (const auto& b : a.value("biomarkers", json::array())) {
    records.push_back({b.at("name").get<std::string>(), b.at("value").is_string() ? b["value"].get<std::string>()
                                                                                   : b["value"].dump(),
                       str(b, "unit"), str(b, "measured_at")});
  }
  const auto before = world_->owner(owner).holder().credentials().size();
  world_->issue_biomarkers(owner, sample, records);
  ids.push_back(sample);
  const bool ok = world_->owner(owner).holder().credentials().size() == before + 1;
  return {{"ok", ok}, {"sample_id", sample}};
}

json ScenarioRunner::act_handshake(const json& a) {
  const auto owner_name = str(a, "owner");
  const auto pid = str(a, "project");
  auto& owner = world_->owner(owner_name);
  const auto saved = owner.policy();
  if (a.contains("selected") || a.contains("policy")) {
    auto p = a.contains("policy") ? owner_policy_from_json(a["policy"]) : saved;
    if (a.contains("selected")) p.selection = a["selected"].get<std::vector<std::string>>();
    owner.set_policy(p);
  }
  std::string sid;
  try {
    sid = world_->start_session(owner_name, advert(pid).advert_id);
  } catch (...) {
    owner.set_policy(saved);
    throw;
  }
  owner.set_policy(saved);
  owner_sessions_[owner_name].push_back(sid);
  const auto& s = owner.session(sid);
  const auto state = exchange::to_string(s.state);
  const auto expect = str(a, "expect", "REWARDED");
  bool ok = state == expect;
  if (ok && a.contains("reason")) ok = s.abort_reason == str(a, "reason");
  json out = {{"ok", ok}, {"session", sid}, {"state", state}};
  if (!s.abort_reason.empty()) out["abort_reason"] = s.abort_reason;
  return out;
}

json ScenarioRunner::act_configure_recovery(const json& a) {
  const auto owner = str(a, "owner");
  auto& agent = world_->agent(owner);
  std::vector<std::string> conns;
  for (const auto& g : a.value("guardians", std::vector<std::string>{})) conns.push_back(world_->connect(g, owner).second);
  auto rng = crypto::Drbg(config_.world.seed).fork("wallet-salt:" + owner);
  Recovery r;
  r.salt = rng.bytes(16);
  r.key = agent::derive_wallet_key(str(a, "passphrase", owner), r.salt);
  agent::Effects fx;
  r.config = exchange::configure_recovery(agent, conns, a.value("k", 2), r.key, fx);
  world_->post(std::move(fx), agent);
  world_->run();
  recovery_[owner] = r;
  return {{"ok", true}, {"k", r.config.k}, {"guardians", conns.size()}};
}

json ScenarioRunner::act_recover(const json& a) {
  const auto owner = str(a, "owner");
  auto it = recovery_.find(owner);
  if (it == recovery_.end()) throw Error("no-recovery", owner + " has no recovery configured");
  auto& agent = world_->agent(owner);
  auto rng = crypto::Drbg(config_.world.seed).fork("seal:" + owner);
  const auto sealed = agent::wallet_save_with_key(agent.wallet(), it->second.key, it->second.salt, rng);
  std::vector<crypto::SecretShare> shares;
  for (const auto& g : a.value("guardians", std::vector<std::string>{})) {
    if (auto s = world_->guardian(g).release(it->second.config.owner_ref)) shares.push_back(*s);
  }
  const auto expect = str(a, "expect", "ok");
  try {
    const auto restored = exchange::recover_wallet(shares, sealed);
    const bool identical = restored == agent.wallet();
    return {{"ok", expect == "ok" && identical}, {"identical", identical}, {"shares", shares.size()}};
  } catch (const Error& e) {
    return {{"ok", expect == e.code()}, {"error", e.code()}, {"shares", shares.size()}};
  }
}

json ScenarioRunner::act_plant_sentinel(const json& a) {
  // Fault injection for the PHI audit: a schema whose name leaks a sample id.
  const auto owner = str(a, "owner");
  const auto& ids = sample_ids_[owner];
  if (ids.empty()) throw Error("no-sample", owner + " has no issued sample");
  auto& myco = world_->agent("MYco");
  const auto tx = ledger::make_schema(myco.wallet().public_did->key, "control-" + ids.back(), "1.0",
                                      {{"note", "string", 0, 0}}, myco.rng());
  const auto receipt = world_->client().submit(tx);
  return {{"ok", true}, {"height", receipt.height}};
}

std::vector<std::string> ScenarioRunner::transcript_lines() const {
  std::vector<std::string> out;
  auto emit = [&](const std::string& role, const std::string& actor,
                  const std::map<std::string, exchange::HandshakeSession>& sessions) {
    for (const auto& [id, s] : sessions) {
      for (const auto& e : s.transcript) {
        out.push_back(json{{"role", role},
                           {"actor", actor},
                           {"session", id},
                           {"project", s.project_id},
                           {"seq", e.seq},
                           {"event", e.event},
                           {"direction", e.direction},
                           {"state", e.state},
                           {"digest", e.digest},
                           {"detail", e.detail}}
                          .dump());
      }
    }
  };
  for (const auto& n : config_.researchers) emit("researcher", n, world_->researcher(n).sessions());
  for (const auto& [n, p] : config_.owners) emit("owner", n, world_->owner(n).sessions());
  return out;
}

std::vector<std::string> ScenarioRunner::block_lines() const {
  std::vector<std::string> out;
  for (const auto& b : world_->net().reference().chain()) out.push_back(ledger::block_log_line(b));
  return out;
}

std::vector<std::string> ScenarioRunner::sentinels() const {
  std::vector<std::string> out;
  for (const auto& [owner, ids] : sample_ids_) out.insert(out.end(), ids.begin(), ids.end());
  for (const auto& [n, p] : config_.owners) {
    for (const auto& hc : world_->owner(n).holder().credentials()) {
      if (hc.credential.cred_def_id != world_->myco().cred_def_id()) continue;
      for (const auto& attr : hc.credential.attributes) out.push_back(crypto::to_hex(attr.salt));
    }
  }
  return out;
}

std::map<std::string, std::vector<json>> ScenarioRunner::researcher_views() const {
  std::map<std::string, std::vector<json>> out;
  for (const auto& n : config_.researchers) {
    auto& a = world_->agent(n);
    auto& v = out[n];
    for (const auto& r : a.received()) {
      json e = r;
      const auto cid = r.value("connection_id", "");
      if (a.wallet().connections.count(cid)) {
        const auto& c = a.wallet().connections.at(cid);
        e["their_did"] = c.their_did;
        e["their_vk"] = c.their_vk.hex();
        e["label"] = c.label;
      }
      v.push_back(std::move(e));
    }
  }
  return out;
}

void ScenarioRunner::write_artifacts(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "views");
  write_lines(dir / "transcript.jsonl", transcript_lines());
  write_lines(dir / "blocks.jsonl", block_lines());
  ledger::write_genesis_file(dir / "genesis.jsonl", world_->net().genesis_config());
  write_lines(dir / "board.jsonl", world_->board().dump());
  std::vector<std::string> wire;
  for (const auto& w : world_->bus().wire()) wire.push_back(w.dump());
  write_lines(dir / "wire.jsonl", wire);
  write_json(dir / "sentinels.json", sentinels());
  for (const auto& [n, entries] : researcher_views()) {
    std::vector<std::string> lines;
    for (const auto& e : entries) lines.push_back(e.dump());
    write_lines(dir / "views" / (n + ".jsonl"), lines);
  }
  write_json(dir / "summary.json", result_.summary);
}

ScenarioResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out) {
  ScenarioRunner runner(config);
  auto r = runner.run();
  if (!out.empty()) runner.write_artifacts(out);
  return r;
}

std::string file_digest(const std::vector<std::string>& lines) {
  std::string all;
  for (const auto& l : lines) {
    all += l;
    all += '\n';
  }
  return crypto::hash(std::string_view(all)).hex();
}

}  // namespace omic::sim
