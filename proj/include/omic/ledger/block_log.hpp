#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "omic/ledger/state.hpp"

namespace omic::ledger {

struct GenesisConfig {
  std::vector<ValidatorInfo> validators;
  std::vector<Transaction> nyms;  // initial public DIDs (issuers, ERB)
};

Block make_genesis_block(const GenesisConfig& config);

// Genesis file: one JSON record per line, {"kind":"validator",...} then
// {"kind":"nym","tx":{...}}.
void write_genesis_file(const std::filesystem::path& path, const GenesisConfig& config);
GenesisConfig read_genesis_file(const std::filesystem::path& path);

// Block log: one canonical JSON block per line, genesis first.
std::string block_log_line(const Block& block);
void write_block_log(const std::filesystem::path& path, std::span<const Block> blocks);
std::vector<std::string> read_lines(const std::filesystem::path& path);

struct ChainVerification {
  bool ok = false;
  std::int64_t verified_height = -1;  // last height that validated
  std::string failure;                // first failure, empty when ok
};

// True iff every block links to its predecessor, its tx_root matches, its
// proposer signature and quorum certificate validate against the genesis
// validator set, and every transaction re-validates in order.
ChainVerification verify_chain(std::span<const Block> blocks);
ChainVerification verify_chain_lines(const std::vector<std::string>& lines);

// Fold of apply_block over the log. Throws omic::Error on any failure.
LedgerState replay(std::span<const Block> blocks);

}  // namespace omic::ledger
