#include "omic/ledger/consensus.hpp"

#include <set>

#include "omic/error.hpp"

namespace omic::ledger {

namespace {

constexpr std::pair<Phase, std::string_view> kPhaseNames[] = {
    {Phase::kPrePrepare, "PRE_PREPARE"}, {Phase::kPrepare, "PREPARE"},
    {Phase::kCommit, "COMMIT"},          {Phase::kViewChange, "VIEW_CHANGE"},
    {Phase::kDecided, "DECIDED"},        {Phase::kTx, "TX"},
};

json votes_to_json(const std::vector<Vote>& votes) {
  json a = json::array();
  for (const auto& v : votes) {
    a.push_back({{"sender", v.sender}, {"view", v.view}, {"signature", v.signature.hex()}});
  }
  return a;
}

std::vector<Vote> votes_from_json(const json& a) {
  std::vector<Vote> out;
  for (const auto& v : a) {
    out.push_back({v.at("sender").get<std::string>(), v.at("view").get<std::int64_t>(),
                   crypto::Signature::from_hex(v.at("signature").get<std::string>())});
  }
  return out;
}

const ValidatorInfo* find_validator(const std::vector<ValidatorInfo>& vs, const std::string& id) {
  for (const auto& v : vs) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

}  // namespace

std::string to_string(Phase p) {
  for (auto [ph, name] : kPhaseNames) {
    if (ph == p) return std::string(name);
  }
  return "?";
}

Phase phase_from_string(std::string_view s) {
  for (auto [ph, name] : kPhaseNames) {
    if (name == s) return ph;
  }
  throw Error("malformed", "unknown consensus phase");
}

json ConsensusMessage::to_json() const {
  json j = {{"phase", to_string(phase)},   {"view", view},     {"height", height},
            {"block_hash", block_hash.hex()}, {"sender", sender}, {"signature", signature.hex()}};
  if (block) j["block"] = block->to_json();
  if (justify) {
    j["justify"] = {{"view", justify->view},
                    {"block_hash", justify->block_hash.hex()},
                    {"votes", votes_to_json(justify->votes)}};
  }
  if (tx) j["tx"] = tx->to_json();
  return j;
}

ConsensusMessage ConsensusMessage::from_json(const json& j) {
  try {
    ConsensusMessage m;
    m.phase = phase_from_string(j.at("phase").get<std::string>());
    m.view = j.at("view").get<std::int64_t>();
    m.height = j.at("height").get<std::int64_t>();
    m.block_hash = crypto::Digest32::from_hex(j.at("block_hash").get<std::string>());
    m.sender = j.at("sender").get<std::string>();
    m.signature = crypto::Signature::from_hex(j.at("signature").get<std::string>());
    if (j.contains("block")) m.block = Block::from_json(j.at("block"));
    if (j.contains("justify")) {
      const auto& c = j.at("justify");
      m.justify = PreparedCertificate{c.at("view").get<std::int64_t>(),
                                      crypto::Digest32::from_hex(c.at("block_hash").get<std::string>()),
                                      votes_from_json(c.at("votes"))};
    }
    if (j.contains("tx")) m.tx = Transaction::from_json(j.at("tx"));
    return m;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("consensus message: ") + e.what());
  }
}

std::string ConsensusMessage::signing_bytes() const {
  if (phase == Phase::kPrepare || phase == Phase::kCommit) {
    return vote_bytes(phase, view, height, block_hash, sender);
  }
  json j = to_json();
  j.erase("signature");
  return canonical(j);
}

void ConsensusMessage::sign(const crypto::KeyPair& key) {
  signature = key.sign(crypto::as_bytes(signing_bytes()));
}

std::string vote_bytes(Phase phase, std::int64_t view, std::int64_t height,
                       const crypto::Digest32& block_hash, const std::string& sender) {
  return canonical({{"phase", to_string(phase)},
                    {"view", view},
                    {"height", height},
                    {"block_hash", block_hash.hex()},
                    {"sender", sender}});
}

bool verify_votes(Phase phase, std::int64_t height, const crypto::Digest32& block_hash,
                  const std::vector<Vote>& votes, const std::vector<ValidatorInfo>& validators,
                  std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (votes.size() < quorum_size(validators.size())) return fail("certificate below quorum");
  std::set<std::string> senders;
  for (const auto& v : votes) {
    if (v.view != votes.front().view) return fail("certificate mixes views");
    const auto* val = find_validator(validators, v.sender);
    if (!val) return fail("vote from unknown validator " + v.sender);
    if (!senders.insert(v.sender).second) return fail("duplicate vote from " + v.sender);
    auto msg = vote_bytes(phase, v.view, height, block_hash, v.sender);
    if (!crypto::verify(val->verkey, crypto::as_bytes(msg), v.signature)) {
      return fail("bad vote signature from " + v.sender);
    }
  }
  return true;
}

bool verify_prepared(const PreparedCertificate& cert, std::int64_t height,
                     const std::vector<ValidatorInfo>& validators) {
  if (cert.votes.empty() || cert.votes.front().view != cert.view) return false;
  return verify_votes(Phase::kPrepare, height, cert.block_hash, cert.votes, validators);
}

}  // namespace omic::ledger
