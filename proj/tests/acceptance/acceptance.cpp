// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

#include "omic/agent/envelope.hpp"
#include "omic/crypto/hash_chain.hpp"
#include "omic/error.hpp"
#include "omic/ledger/builders.hpp"
#include "omic/ledger/simnet.hpp"
#include "omic/sim/audit.hpp"
#include "omic/sim/scenario.hpp"

using namespace omic;
using namespace omic::sim;
using json = nlohmann::json;

namespace {

const std::filesystem::path kScenarios = OMIC_SCENARIO_DIR;

ScenarioConfig scenario(const std::string& name) { return ScenarioConfig::load(kScenarios / (name + ".json")); }

std::filesystem::path out_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / "omic-acceptance" / name;
  std::filesystem::remove_all(d);
  return d;
}

struct Outcome {
  bool pass = false;
  std::string note;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

// 1. Happy path through the CLI and the library.
Outcome happy_path() {
  const auto dir = out_dir("happy");
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = std::string(OMICLEDGER_BIN) + " run --config " + (kScenarios / "happy_path.json").string() +
                          " --out " + dir.string() + " > " + (dir.parent_path() / "happy.log").string() + " 2>&1";
  std::filesystem::create_directories(dir.parent_path());
  const int rc = std::system(cmd.c_str());
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc != 0) return fail("omicledger run exited " + std::to_string(rc));
  const auto r = run_scenario(scenario("happy_path"));
  if (!r.ok) return fail("library run not ok");
  std::size_t rewarded = 0;
  for (const auto& s : r.summary["sessions"]) rewarded += s["state"] == "REWARDED";
  if (r.summary["sessions"].size() != 2 || rewarded != 2) return fail("expected 2 REWARDED sessions");
  if (secs >= 30) return fail("runtime " + std::to_string(secs) + " s");
  return {true, "2/2 REWARDED, exit 0, " + std::to_string(secs).substr(0, 4) + " s"};
}

// 2. No sentinel in the block log or board; the planted control is found once.
Outcome phi() {
  const auto clean = out_dir("phi-clean");
  run_scenario(scenario("happy_path"), clean);
  const auto f = phi_scan_artifacts(clean);
  if (!f.empty()) return fail(std::to_string(f.size()) + " findings in the happy path");
  const auto planted = out_dir("phi-planted");
  run_scenario(scenario("phi_control"), planted);
  const auto g = phi_scan_artifacts(planted);
  if (g.size() != 1) return fail("planted control gave " + std::to_string(g.size()) + " findings");
  if (!phi_scan({}, {}, {"SMP-0"}).empty()) return fail("empty log produced findings");
  return {true, "0 findings; control found at " + g[0].location};
}

// 3. One owner, two researchers.
Outcome unlinkability() {
  const auto a = out_dir("unlink");
  if (!run_scenario(scenario("unlink"), a).ok) return fail("unlink scenario failed");
  const auto ra = unlinkability_audit_artifacts(a);
  if (!ra.pass || !ra.known_limitation.empty()) return fail("distinct credentials: " + ra.to_json().dump());
  for (const auto& o : ra.public_overlap) {
    if (o["kind"] != "cred-def-id" && o["kind"] != "schema" && o["kind"] != "issuer-did") {
      return fail("non-public overlap " + o.dump());
    }
  }
  const auto b = out_dir("unlink-same");
  if (!run_scenario(scenario("unlink_same_credential"), b).ok) return fail("same-credential scenario failed");
  const auto rb = unlinkability_audit_artifacts(b);
  if (!rb.pass) return fail("same credential: violations " + json(rb.violations).dump());
  if (rb.known_limitation.size() != 1 || rb.known_limitation[0]["kind"] != "revocation-handle") {
    return fail("same credential: expected one revocation-handle entry");
  }
  return {true, "distinct: public overlap only; same credential: 1 revocation-handle known limitation (" +
                    std::to_string(rb.known_limitation[0]["same_credential_parts"].size()) + " folded parts)"};
}

// 4. 17 x 17 value/threshold grid at v_max 16, issued, presented and verified
// through the whole stack, against a brute-force table built first.
Outcome predicate_grid() {
  constexpr std::int64_t kVmax = 16;
  std::vector<std::vector<bool>> oracle(kVmax + 1, std::vector<bool>(kVmax + 1));
  std::size_t oracle_true = 0;
  for (std::int64_t v = 0; v <= kVmax; ++v) {
    for (std::int64_t t = 0; t <= kVmax; ++t) oracle_true += (oracle[v][t] = v >= t);
  }
  if (oracle_true != 153) return fail("oracle table is not the frozen 153 true cells");

  WorldConfig wc;
  wc.seed = 16;
  wc.panel = {{"score", "pt", 0, kVmax}};
  World w(wc);
  for (std::int64_t v = 0; v <= kVmax; ++v) {
    const auto name = "P" + std::to_string(v);
    w.add_owner(name);
    w.issue_biomarkers(name, "S" + std::to_string(v), {{"score", std::to_string(v), "pt", "2025-09-01"}});
  }
  crypto::Drbg rng(4);
  const auto cd = w.myco().cred_def_id();
  std::size_t mismatches = 0, cells = 0;
  for (std::int64_t v = 0; v <= kVmax; ++v) {
    const auto held = w.owner("P" + std::to_string(v)).holder().credentials();
    if (held.size() != 1) return fail("issuance failed for value " + std::to_string(v));
    for (std::int64_t t = 0; t <= kVmax; ++t) {
      const auto req = credentials::make_request({{cd, {}, {{"score", t}}}}, "grid", rng);
      auto verify = [&](const credentials::Presentation& p) {
        credentials::NonceBook book;
        book.issue(req.nonce);
        return credentials::verify_presentation(p, req, w.client().state(), book).accept;
      };
      bool accepted = false;
      try {
        accepted = verify(credentials::create_presentation(held, req, w.client().state().height(), rng));
      } catch (const Error& e) {
        if (e.code() != "cannot-satisfy" || v >= t) return fail("honest prover threw " + e.code());
      }
      if (v < t) {
        // Dishonest prover: a valid proof for its own value, relabelled with
        // the higher threshold and every reachable chain value, re-bound.
        auto own = req;
        own.requested[0].predicates[0].threshold = v;
        const auto base = credentials::create_presentation(held, own, w.client().state().height(), rng);
        const auto token = held[0].holder_tokens.at("score");
        for (std::int64_t k = 0; k <= kVmax && !accepted; ++k) {
          auto p = base;
          p.credentials[0].predicates[0].threshold = t;
          p.credentials[0].predicates[0].proof = crypto::hash_iterate(token, static_cast<std::uint64_t>(k));
          const auto binding = crypto::generate_keypair(rng.bytes(32));
          p.binding_key = binding.verification_key();
          p.binding_signature = binding.sign(crypto::as_bytes(p.body_bytes()));
          accepted = verify(p);
        }
      }
      ++cells;
      mismatches += accepted != oracle[v][t];
    }
  }
  if (mismatches) return fail(std::to_string(mismatches) + " of " + std::to_string(cells) + " cells disagree");
  return {true, std::to_string(cells) + " cells, 0 discrepancies, dishonest prover rejected"};
}

// 5. 200 seeded schedules with at most one crashed validator.
Outcome bft() {
  std::size_t safety = 0, liveness = 0;
  std::int64_t worst_view = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    ledger::SimNet net({.seed = seed});
    crypto::Drbg rng(seed * 7919);
    if (seed % 4 != 0) net.crash(rng.uniform(4));
    std::vector<crypto::Digest32> digests;
    for (int i = 0; i < 3; ++i) {
      auto tx = ledger::make_nym(crypto::generate_keypair(rng.bytes(32)), "researcher", rng);
      digests.push_back(tx.digest());
      if (net.submit(tx)) return fail("valid tx rejected at seed " + std::to_string(seed));
      net.run_for(static_cast<std::int64_t>(rng.uniform(60)));
    }
    const bool done = net.run_until(
        [&] {
          for (const auto& d : digests) {
            if (!net.find_committed(d)) return false;
          }
          return true;
        },
        100000);
    if (!net.chains_consistent()) ++safety;
    if (!done) {
      ++liveness;
      continue;
    }
    for (const auto& d : digests) {
      const auto h = net.find_committed(d)->height;
      const auto view = net.reference().commit_views()[static_cast<std::size_t>(h)];
      worst_view = std::max(worst_view, view);
      if (view > 4) ++liveness;
    }
  }
  ledger::SimNet net({.seed = 7});
  net.crash(0);
  crypto::Drbg rng(1);
  const auto receipt = net.submit_and_wait(ledger::make_nym(crypto::generate_keypair(rng.bytes(32)), "issuer", rng));
  const auto view = net.reference().commit_views()[static_cast<std::size_t>(receipt.height)];
  if (safety || liveness) {
    return fail(std::to_string(safety) + " safety and " + std::to_string(liveness) + " liveness violations");
  }
  if (view != 1) return fail("crashed leader committed in view " + std::to_string(view));
  return {true, "200 schedules, 0 violations, worst commit view " + std::to_string(worst_view) +
                    ", crashed leader committed after 1 view change"};
}

// Flips one leaf of a JSON document: a hex digit, a character, a number or a bool.
void mutate_leaf(json& doc, crypto::Drbg& rng) {
  std::vector<json*> leaves;
  std::function<void(json&)> walk = [&](json& j) {
    if (j.is_object() || j.is_array()) {
      for (auto& c : j) walk(c);
    } else if (!j.is_null()) {
      leaves.push_back(&j);
    }
  };
  walk(doc);
  json& leaf = *leaves[rng.uniform(leaves.size())];
  if (leaf.is_boolean()) {
    leaf = !leaf.get<bool>();
  } else if (leaf.is_number_integer()) {
    leaf = leaf.get<std::int64_t>() + (rng.uniform(2) ? 1 : -1);
  } else if (leaf.is_number()) {
    leaf = leaf.get<double>() + 1;
  } else {
    auto s = leaf.get<std::string>();
    if (s.empty()) {
      s = "x";
    } else {
      const auto i = rng.uniform(s.size());
      const std::string hex = "0123456789abcdef";
      const std::string alpha = "ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz123456789";
      const auto& pool = hex.find(s[i]) != std::string::npos ? hex : alpha;
      char c = s[i];
      while (c == s[i]) c = pool[rng.uniform(pool.size())];
      s[i] = c;
    }
    leaf = s;
  }
}

// 6. 100 single-field mutations each of presentations, blocks and envelopes.
Outcome tamper() {
  crypto::Drbg rng(66);
  std::size_t accepted = 0;

  ScenarioRunner runner(scenario("happy_path"));
  runner.run();
  auto& w = runner.world();
  const auto held = w.owner("Ann").holder().credentials();
  const auto cd = w.myco().cred_def_id();
  for (int i = 0; i < 100; ++i) {
    const auto req = credentials::make_request({{cd, {"ldl", "sample_id"}, {{"ldl", 20}, {"hba1c", 10}}}}, "t", rng);
    const auto p = credentials::create_presentation(held, req, w.client().state().height(), rng);
    auto verify = [&](const credentials::Presentation& q) {
      credentials::NonceBook book;
      book.issue(req.nonce);
      return credentials::verify_presentation(q, req, w.client().state(), book).accept;
    };
    if (!verify(p)) return fail("unmutated presentation rejected");
    auto j = p.to_json();
    mutate_leaf(j, rng);
    try {
      accepted += verify(credentials::Presentation::from_json(j));
    } catch (const Error&) {
    }
  }
  const auto presentations = accepted;

  const auto lines = runner.block_lines();
  if (!ledger::verify_chain_lines(lines).ok) return fail("unmutated chain rejected");
  for (int i = 0; i < 100; ++i) {
    auto copy = lines;
    auto& line = copy[rng.uniform(copy.size())];
    auto j = json::parse(line);
    mutate_leaf(j, rng);
    line = j.dump();
    accepted += ledger::verify_chain_lines(copy).ok;
  }
  const auto blocks = accepted - presentations;

  for (int i = 0; i < 100; ++i) {
    const auto a = crypto::generate_keypair(rng.bytes(32));
    const auto b = crypto::generate_keypair(rng.bytes(32));
    const auto payload = rng.bytes(1 + rng.uniform(64));
    auto e = i % 2 ? agent::pack_authcrypt(a, b.verification_key(), payload, rng)
                   : agent::pack_anoncrypt(b.verification_key(), payload, rng);
    if (agent::unpack(b, e).payload != payload) return fail("unmutated envelope failed");
    switch (rng.uniform(4)) {
      case 0: {
        const auto k = rng.uniform(e.to.size());
        e.to[k] = e.to[k] == 'A' ? 'B' : 'A';
        break;
      }
      case 1:
        e.mode = e.mode == agent::EnvelopeMode::kAuthcrypt ? agent::EnvelopeMode::kAnoncrypt
                                                           : agent::EnvelopeMode::kAuthcrypt;
        break;
      case 2:
        e.nonce[rng.uniform(e.nonce.size())] ^= static_cast<std::uint8_t>(1u << rng.uniform(8));
        break;
      default:
        e.ciphertext[rng.uniform(e.ciphertext.size())] ^= static_cast<std::uint8_t>(1u << rng.uniform(8));
    }
    try {
      agent::unpack(b, e);
      ++accepted;
    } catch (const Error&) {
    }
  }
  if (accepted) {
    return fail(std::to_string(accepted) + " mutants accepted (presentations " + std::to_string(presentations) +
                ", blocks " + std::to_string(blocks) + ")");
  }
  return {true, "300 mutants, 0 accepted"};
}

// 7. Milestone order in every transcript, and the reward-before-transfer hook.
Outcome ordering() {
  const std::vector<std::string> milestones = {"terms", "eligibility-presentation", "consent", "data", "reward"};
  std::size_t sessions = 0;
  for (const auto* name : {"happy_path", "crash_leader", "unlink", "unlink_same_credential", "revocation", "expired",
                           "recovery"}) {
    ScenarioRunner runner(scenario(name));
    runner.run();
    std::map<std::string, std::vector<json>> by_session;
    for (const auto& line : runner.transcript_lines()) {
      const auto e = json::parse(line);
      by_session[e["role"].get<std::string>() + "/" + e["session"].get<std::string>()].push_back(e);
    }
    for (const auto& [key, events] : by_session) {
      ++sessions;
      std::vector<std::int64_t> at;
      for (const auto& m : milestones) {
        std::int64_t pos = -1;
        for (std::size_t i = 0; i < events.size(); ++i) {
          if (events[i]["event"] == m) {
            pos = static_cast<std::int64_t>(i);
            break;
          }
        }
        at.push_back(pos);
      }
      for (std::size_t i = 1; i < at.size(); ++i) {
        if (at[i] >= 0 && (at[i - 1] < 0 || at[i - 1] >= at[i])) {
          return fail(std::string(name) + " " + key + ": " + milestones[i] + " out of order");
        }
      }
      if (events.back()["state"] == "REWARDED" && at.back() < 0) return fail(key + " rewarded without a reward event");
    }
  }

  auto cfg = scenario("happy_path");
  cfg.owners[0].second = {{"auto_consent", false}};
  cfg.script.resize(4);
  cfg.script.push_back({{"action", "handshake"}, {"owner", "Ann"}, {"project", "lipid-2025"}, {"expect", "ELIGIBILITY_PROVEN"}});
  ScenarioRunner runner(cfg);
  if (!runner.run().ok) return fail("hook scenario did not reach ELIGIBILITY_PROVEN");
  auto& w = runner.world();
  const auto sid = runner.owner_sessions().at("Ann").front();
  const auto before = w.owner("Ann").session(sid).to_json();
  auto& researcher = w.researcher("Uni-Lab");
  const auto rs = researcher.sessions().begin()->first;
  agent::Effects fx;
  researcher.force_reward(rs, fx);
  w.post(std::move(fx), w.agent("Uni-Lab"));
  w.run();
  if (w.owner("Ann").session(sid).to_json() != before) return fail("owner session changed after early reward");
  if (!w.owner("Ann").rewards().empty()) return fail("early reward stored");
  const auto& back = researcher.session(rs).transcript.back();
  if (back.detail.value("code", "") != "out-of-order") return fail("early reward not refused as out-of-order");
  return {true, std::to_string(sessions) + " session transcripts ordered; early reward refused, state unchanged"};
}

// 8. Revocation of an ethics certificate.
Outcome revocation() {
  ScenarioRunner runner(scenario("revocation"));
  const auto r = runner.run();
  if (!r.ok) return fail("revocation scenario failed");
  const auto& sessions = r.summary["sessions"];
  if (sessions[0]["state"] != "REWARDED") return fail("pre-revocation session not rewarded");
  for (std::size_t i = 1; i < sessions.size(); ++i) {
    if (sessions[i]["state"] != "ABORTED" || sessions[i]["abort_reason"] != "revoked") {
      return fail("post-revocation session " + std::to_string(i) + " not aborted as revoked");
    }
  }
  auto& w = runner.world();
  const auto first = runner.owner_sessions().begin();
  if (w.owner(first->first).session(first->second.front()).state != exchange::SessionState::kRewarded ||
      w.owner(first->first).rewards().empty()) {
    return fail("completed session disturbed by revocation");
  }
  const auto& state = w.client().state();
  const auto reg_id = ledger::registry_id_for(w.erb().cred_def_id());
  const auto* reg = state.registry(reg_id);
  if (!reg || reg->revoked.empty()) return fail("no revoked handle on the ledger");
  for (const auto& [handle, height] : reg->revoked) {
    bool seen = false;
    for (std::int64_t h = 0; h <= state.height(); ++h) {
      const bool now = state.is_revoked(reg_id, handle, h);
      if (seen && !now) return fail("revocation not monotone at height " + std::to_string(h));
      seen = seen || now;
    }
    if (!seen) return fail("revoked handle never reported revoked");
  }
  return {true, "1 rewarded before, " + std::to_string(sessions.size() - 1) +
                    " aborted after; monotone over " + std::to_string(state.height() + 1) + " heights"};
}

// 9. 2-of-3 guardian recovery.
Outcome recovery() {
  const auto r = run_scenario(scenario("recovery"));
  std::size_t restored = 0;
  bool single_failed = false;
  for (const auto& a : r.actions) {
    if (a.action != "recover") continue;
    if (a.detail.value("shares", 0) == 2 && a.detail.value("identical", false)) ++restored;
    if (a.detail.value("shares", 0) == 1 && a.detail.value("error", "") == "insufficient-shares") single_failed = true;
  }
  if (!r.ok || restored != 3 || !single_failed) return fail("restored " + std::to_string(restored) + "/3");
  return {true, "3/3 pairs restore an identical wallet; 1 share refused"};
}

// 10. Equal seeds, equal digests, for every shipped scenario.
Outcome determinism() {
  std::size_t n = 0;
  for (const auto& f : std::filesystem::directory_iterator(kScenarios)) {
    if (f.path().extension() != ".json") continue;
    const auto cfg = ScenarioConfig::load(f.path());
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    if (a.transcript_digest != b.transcript_digest || a.block_log_digest != b.block_log_digest) {
      return fail(f.path().filename().string() + " diverged");
    }
    ++n;
  }
  return {true, std::to_string(n) + " scenarios reproduced byte for byte"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"end-to-end happy path", happy_path},
      {"PHI exclusion", phi},
      {"identity firewall", unlinkability},
      {"predicate oracle equivalence", predicate_grid},
      {"BFT safety and liveness", bft},
      {"tamper suite", tamper},
      {"protocol ordering", ordering},
      {"revocation", revocation},
      {"guardian recovery", recovery},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("threw: ") + e.what());
    }
    failed += !o.pass;
    std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << " ("
              << o.note << ")" << std::endl;
  }
  return failed ? 1 : 0;
}
