#include "omic/ledger/block_log.hpp"

#include <fstream>

#include "omic/error.hpp"

namespace omic::ledger {

Block make_genesis_block(const GenesisConfig& config) {
  Block g;
  g.height = 0;
  g.txs = config.nyms;
  g.tx_root = compute_tx_root(g.txs);
  g.proposer = "genesis";
  g.validators = config.validators;
  return g;
}

void write_genesis_file(const std::filesystem::path& path, const GenesisConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  for (const auto& v : config.validators) {
    out << canonical({{"kind", "validator"}, {"id", v.id}, {"verkey", v.verkey.hex()}, {"address", v.address}})
        << "\n";
  }
  for (const auto& tx : config.nyms) out << canonical({{"kind", "nym"}, {"tx", tx.to_json()}}) << "\n";
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

GenesisConfig read_genesis_file(const std::filesystem::path& path) {
  GenesisConfig g;
  for (const auto& line : read_lines(path)) {
    try {
      auto j = json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "validator") {
        g.validators.push_back({j.at("id").get<std::string>(),
                                crypto::VerificationKey::from_hex(j.at("verkey").get<std::string>()),
                                j.value("address", "")});
      } else if (kind == "nym") {
        g.nyms.push_back(Transaction::from_json(j.at("tx")));
      } else {
        throw Error("malformed", "unknown genesis record kind " + kind);
      }
    } catch (const json::exception& e) {
      throw Error("malformed", std::string("genesis: ") + e.what());
    }
  }
  return g;
}

std::string block_log_line(const Block& block) { return canonical(block.to_json()); }

void write_block_log(const std::filesystem::path& path, std::span<const Block> blocks) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  for (const auto& b : blocks) out << block_log_line(b) << "\n";
}

ChainVerification verify_chain(std::span<const Block> blocks) {
  ChainVerification v;
  if (blocks.empty()) {
    v.failure = "empty log";
    return v;
  }
  const auto& genesis = blocks.front();
  if (genesis.height != 0 || !genesis.prev_hash.is_zero() || genesis.validators.size() < 4 ||
      genesis.proposer != "genesis" || genesis.view != 0 || genesis.proposer_signature != crypto::Signature{} ||
      !genesis.quorum_certificate.empty()) {
    v.failure = "block 0 is not a genesis block";
    return v;
  }
  LedgerState state;
  for (const auto& b : blocks) {
    if (b.height != 0 && !b.validators.empty()) {
      v.failure = "block " + std::to_string(b.height) + ": validator set outside genesis";
      return v;
    }
    try {
      state = apply_block(state, b, genesis.validators);
    } catch (const Error& e) {
      v.failure = "block " + std::to_string(b.height) + ": " + e.code() + " (" + e.what() + ")";
      return v;
    }
    v.verified_height = b.height;
  }
  v.ok = true;
  return v;
}

ChainVerification verify_chain_lines(const std::vector<std::string>& lines) {
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      blocks.push_back(Block::from_json(json::parse(lines[i])));
    } catch (const std::exception& e) {
      ChainVerification v;
      v.verified_height = static_cast<std::int64_t>(i) - 1;
      v.failure = "line " + std::to_string(i) + ": " + e.what();
      return v;
    }
  }
  return verify_chain(blocks);
}

LedgerState replay(std::span<const Block> blocks) {
  if (blocks.empty()) throw Error("malformed", "empty log");
  LedgerState state;
  for (const auto& b : blocks) state = apply_block(state, b, blocks.front().validators);
  return state;
}

}  // namespace omic::ledger
