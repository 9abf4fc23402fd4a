#include "omic/ledger/block.hpp"

#include "omic/crypto/merkle.hpp"
#include "omic/error.hpp"

namespace omic::ledger {

crypto::Digest32 compute_tx_root(const std::vector<Transaction>& txs) {
  if (txs.empty()) return {};
  std::vector<crypto::Digest32> leaves;
  leaves.reserve(txs.size());
  for (const auto& tx : txs) leaves.push_back(tx.digest());
  return crypto::merkle_root(leaves);
}

crypto::Digest32 Block::hash() const {
  crypto::Bytes b;
  crypto::append_u64(b, static_cast<std::uint64_t>(height));
  crypto::append(b, prev_hash.view());
  crypto::append(b, tx_root.view());
  // Genesis commits to its validator set.
  if (!validators.empty()) {
    json vs = json::array();
    for (const auto& v : validators) vs.push_back({{"id", v.id}, {"verkey", v.verkey.hex()}, {"address", v.address}});
    crypto::append(b, crypto::hash(canonical(vs)).view());
  }
  return crypto::hash(b);
}

std::string Block::proposal_bytes() const {
  return canonical({{"block_hash", hash().hex()}, {"proposer", proposer}, {"view", view}});
}

json Block::to_json() const {
  json txs_j = json::array();
  for (const auto& tx : txs) txs_j.push_back(tx.to_json());
  json qc = json::array();
  for (const auto& v : quorum_certificate) {
    qc.push_back({{"sender", v.sender}, {"view", v.view}, {"signature", v.signature.hex()}});
  }
  json j = {{"height", height},
            {"hash", hash().hex()},
            {"prev_hash", prev_hash.hex()},
            {"tx_root", tx_root.hex()},
            {"txs", txs_j},
            {"proposer", proposer},
            {"view", view},
            {"proposer_signature", proposer_signature.hex()},
            {"quorum_certificate", qc}};
  if (!validators.empty()) {
    json vs = json::array();
    for (const auto& v : validators) {
      vs.push_back({{"id", v.id}, {"verkey", v.verkey.hex()}, {"address", v.address}});
    }
    j["validators"] = vs;
  }
  return j;
}

Block Block::from_json(const json& j) {
  try {
    Block b;
    b.height = j.at("height").get<std::int64_t>();
    b.prev_hash = crypto::Digest32::from_hex(j.at("prev_hash").get<std::string>());
    b.tx_root = crypto::Digest32::from_hex(j.at("tx_root").get<std::string>());
    for (const auto& t : j.at("txs")) b.txs.push_back(Transaction::from_json(t));
    b.proposer = j.at("proposer").get<std::string>();
    b.view = j.at("view").get<std::int64_t>();
    b.proposer_signature = crypto::Signature::from_hex(j.at("proposer_signature").get<std::string>());
    for (const auto& v : j.at("quorum_certificate")) {
      b.quorum_certificate.push_back({v.at("sender").get<std::string>(), v.at("view").get<std::int64_t>(),
                                      crypto::Signature::from_hex(v.at("signature").get<std::string>())});
    }
    if (j.contains("validators")) {
      for (const auto& v : j.at("validators")) {
        b.validators.push_back({v.at("id").get<std::string>(),
                                crypto::VerificationKey::from_hex(v.at("verkey").get<std::string>()),
                                v.at("address").get<std::string>()});
      }
    }
    if (j.contains("hash") && j.at("hash").get<std::string>() != b.hash().hex()) {
      throw Error("malformed", "stored block hash does not match contents");
    }
    return b;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("block: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == "malformed") throw;
    throw Error("malformed", std::string("block: ") + e.what());
  }
}

}  // namespace omic::ledger
