#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omic/ledger/transaction.hpp"

namespace omic::ledger {

struct ValidatorInfo {
  std::string id;
  crypto::VerificationKey verkey;
  std::string address;  // host:port, socket transport only
  bool operator==(const ValidatorInfo&) const = default;
};

// A signed vote as it appears inside a quorum certificate.
struct Vote {
  std::string sender;
  std::int64_t view = 0;
  crypto::Signature signature;
  bool operator==(const Vote&) const = default;
};

struct Block {
  std::int64_t height = 0;
  crypto::Digest32 prev_hash;
  crypto::Digest32 tx_root;
  std::vector<Transaction> txs;
  std::string proposer;
  std::int64_t view = 0;
  crypto::Signature proposer_signature;
  std::vector<Vote> quorum_certificate;  // COMMIT votes, >= 2f+1
  std::vector<ValidatorInfo> validators;  // genesis only

  // H(u64 height || prev_hash || tx_root).
  crypto::Digest32 hash() const;

  json to_json() const;
  // Throws omic::Error("malformed").
  static Block from_json(const json& j);

  std::string proposal_bytes() const;
};

// Merkle root over transaction digests; all-zero for an empty block.
crypto::Digest32 compute_tx_root(const std::vector<Transaction>& txs);

inline std::size_t fault_tolerance(std::size_t n) { return (n - 1) / 3; }
inline std::size_t quorum_size(std::size_t n) { return 2 * fault_tolerance(n) + 1; }

}  // namespace omic::ledger
