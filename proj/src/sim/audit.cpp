#include "omic/sim/audit.hpp"

#include <fstream>
#include <set>

#include "omic/error.hpp"
#include "omic/ledger/block_log.hpp"

namespace omic::sim {

std::vector<PhiFinding> phi_scan(const std::vector<std::string>& block_lines, const std::vector<std::string>& board_lines,
                                 const std::vector<std::string>& sentinels) {
  std::vector<parallel::Document> docs;
  for (const auto& line : block_lines) {
    std::string where = "block ?";
    try {
      where = "block " + std::to_string(json::parse(line).at("height").get<std::int64_t>());
    } catch (const std::exception&) {
    }
    docs.push_back({where, line});
  }
  for (const auto& line : board_lines) {
    std::string where = "advert ?";
    try {
      where = "advert " + json::parse(line).at("advert_id").get<std::string>();
    } catch (const std::exception&) {
    }
    docs.push_back({where, line});
  }
  std::vector<PhiFinding> out;
  for (auto& m : parallel::scan_substrings_omp(docs, sentinels)) out.push_back({m.location, m.needle});
  return out;
}

namespace {

std::vector<std::string> lines_if_present(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) return {};
  return ledger::read_lines(p);
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("io", "cannot read " + p.string());
  return json::parse(in);
}

}  // namespace

std::vector<PhiFinding> phi_scan_artifacts(const std::filesystem::path& dir) {
  const auto sentinels = read_json(dir / "sentinels.json").get<std::vector<std::string>>();
  return phi_scan(lines_if_present(dir / "blocks.jsonl"), lines_if_present(dir / "board.jsonl"), sentinels);
}

std::vector<Identifier> extract_identifiers(const std::vector<json>& entries) {
  std::vector<Identifier> out;
  auto add = [&](const std::string& kind, const json& v, const std::string& klass, const std::string& cred = "") {
    if (v.is_string() && !v.get<std::string>().empty()) out.push_back({kind, v.get<std::string>(), klass, cred});
  };
  auto presentation = [&](const json& p) {
    if (!p.is_object()) return;
    add("binding-key", p.value("binding_key", json()), "fresh");
    for (const auto& c : p.value("credentials", json::array())) {
      const auto handle = c.value("revocation_handle", std::string());
      add("cred-def-id", c.value("cred_def_id", json()), "public");
      add("revocation-handle", c.value("revocation_handle", json()), "credential", handle);
      add("merkle-root", c.value("merkle_root", json()), "credential", handle);
      add("issuer-signature", c.value("issuer_signature", json()), "credential", handle);
      for (const auto& a : c.value("anchors", json::array())) add("anchor", a.value("anchor", json()), "credential", handle);
      for (const auto& pr : c.value("predicates", json::array()))
        add("predicate-proof", pr.value("proof", json()), "credential", handle);
      for (const auto& r : c.value("revealed", json::array())) {
        add("salt", r.value("salt", json()), "credential", handle);
        for (const auto& s : r.value("path", json::object()).value("siblings", json::array()))
          add("path-digest", s.value("digest", json()), "credential", handle);
      }
    }
  };
  for (const auto& e : entries) {
    if (e.value("label", "") != "anonymous") continue;
    add("pairwise-did", e.value("their_did", json()), "fresh");
    add("pairwise-verkey", e.value("their_vk", json()), "fresh");
    add("sender-verkey", e.value("sender", json()), "fresh");
    const auto& m = e.value("message", json::object());
    add("message-id", m.value("id", json()), "fresh");
    add("thread-id", m.value("thread_id", json()), "fresh");
    const auto& b = m.value("body", json::object());
    const auto type = m.value("type", "");
    if (type == "request") {
      add("pairwise-did", b.value("did", json()), "fresh");
      add("pairwise-verkey", b.value("verkey", json()), "fresh");
      add("request-nonce", b.value("nonce", json()), "fresh");
    }
    if (type == "eligibility-presentation" || type == "presentation") presentation(b);
    if (type == "data") presentation(b.value("presentation", json()));
    if (type == "consent") {
      const auto& c = b.value("consent", json::object());
      add("pairwise-verkey", c.value("signer", json()), "fresh");
      add("consent-signature", c.value("signature", json()), "fresh");
    }
    if (type == "data-ack" || type == "reward-ack") add("signature", b.value("signature", json()), "fresh");
  }
  return out;
}

json UnlinkabilityReport::to_json() const {
  return {{"pass", pass},
          {"identifiers_per_researcher", identifiers_per_researcher},
          {"public_overlap", public_overlap},
          {"known_limitation", known_limitation},
          {"violations", violations}};
}

UnlinkabilityReport unlinkability_audit(const std::map<std::string, std::vector<json>>& views) {
  UnlinkabilityReport r;
  struct Seen {
    std::string kind, klass, credential;
    std::set<std::string> who;
  };
  std::map<std::string, Seen> seen;
  for (const auto& [researcher, entries] : views) {
    auto ids = extract_identifiers(entries);
    std::set<std::string> distinct;
    for (const auto& id : ids) {
      distinct.insert(id.value);
      auto& slot = seen[id.value];
      slot.kind = id.kind;
      slot.klass = id.klass;
      slot.credential = id.credential;
      slot.who.insert(researcher);
    }
    r.identifiers_per_researcher[researcher] = distinct.size();
  }
  // Credential parts are folded under the shared handle of their credential.
  std::map<std::string, json> shared_credentials;
  for (const auto& [value, s] : seen) {
    if (s.who.size() >= 2 && s.kind == "revocation-handle") {
      shared_credentials[value] = {{"kind", s.kind},
                                   {"value", value},
                                   {"researchers", std::vector<std::string>(s.who.begin(), s.who.end())},
                                   {"same_credential_parts", json::array()}};
    }
  }
  for (const auto& [value, s] : seen) {
    if (s.who.size() < 2 || s.kind == "revocation-handle") continue;
    json item = {{"kind", s.kind}, {"value", value}, {"researchers", std::vector<std::string>(s.who.begin(), s.who.end())}};
    if (s.klass == "public") {
      r.public_overlap.push_back(item);
    } else if (s.klass == "credential" && shared_credentials.count(s.credential)) {
      shared_credentials[s.credential]["same_credential_parts"].push_back({{"kind", s.kind}, {"value", value}});
    } else {
      r.violations.push_back(item);
    }
  }
  for (auto& [h, item] : shared_credentials) r.known_limitation.push_back(std::move(item));
  r.pass = r.violations.empty();
  return r;
}

UnlinkabilityReport unlinkability_audit_artifacts(const std::filesystem::path& dir) {
  std::map<std::string, std::vector<json>> views;
  const auto vdir = dir / "views";
  if (std::filesystem::exists(vdir)) {
    std::vector<std::filesystem::path> files;
    for (const auto& f : std::filesystem::directory_iterator(vdir)) files.push_back(f.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      if (f.extension() != ".jsonl") continue;
      auto& v = views[f.stem().string()];
      for (const auto& line : ledger::read_lines(f)) v.push_back(json::parse(line));
    }
  }
  return unlinkability_audit(views);
}

}  // namespace omic::sim
