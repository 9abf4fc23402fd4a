#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omic/ledger/block.hpp"

namespace omic::ledger {

enum class Phase { kPrePrepare, kPrepare, kCommit, kViewChange, kDecided, kTx };

std::string to_string(Phase p);
Phase phase_from_string(std::string_view s);

// 2f+1 PREPARE votes for one (view, height, block) — what a replica locks on.
struct PreparedCertificate {
  std::int64_t view = 0;
  crypto::Digest32 block_hash;
  std::vector<Vote> votes;
};

struct ConsensusMessage {
  Phase phase = Phase::kPrepare;
  std::int64_t view = 0;
  std::int64_t height = 0;
  crypto::Digest32 block_hash;
  std::string sender;
  crypto::Signature signature;

  std::optional<Block> block;                    // PRE_PREPARE, VIEW_CHANGE (locked), DECIDED
  std::optional<PreparedCertificate> justify;    // PRE_PREPARE, VIEW_CHANGE
  std::optional<Transaction> tx;                 // TX gossip

  json to_json() const;
  // Throws omic::Error("malformed").
  static ConsensusMessage from_json(const json& j);

  // Canonical JSON without the signature field.
  std::string signing_bytes() const;
  void sign(const crypto::KeyPair& key);
};

// Signing bytes of a bare vote (PREPARE or COMMIT carry nothing else).
std::string vote_bytes(Phase phase, std::int64_t view, std::int64_t height,
                       const crypto::Digest32& block_hash, const std::string& sender);

// Votes must come from distinct validators, all share one view, and number
// at least 2f+1. Any invalid signature fails the whole certificate.
bool verify_votes(Phase phase, std::int64_t height, const crypto::Digest32& block_hash,
                  const std::vector<Vote>& votes, const std::vector<ValidatorInfo>& validators,
                  std::string* why = nullptr);

bool verify_prepared(const PreparedCertificate& cert, std::int64_t height,
                     const std::vector<ValidatorInfo>& validators);

}  // namespace omic::ledger
