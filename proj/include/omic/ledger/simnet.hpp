#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "omic/crypto/drbg.hpp"
#include "omic/ledger/block_log.hpp"
#include "omic/ledger/replica.hpp"

namespace omic::ledger {

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t validators = 4;
  std::int64_t min_delay = 1;   // ticks
  std::int64_t max_delay = 20;  // ticks, inclusive
  std::int64_t timeout_ticks = 400;
  std::int64_t heartbeat_ticks = 500;
};

struct Receipt {
  std::int64_t height = 0;
  crypto::Digest32 tx_digest;
};

// In-process validator network driven by a seeded scheduler: each message
// gets a delay drawn from [min_delay, max_delay] and equal-time deliveries
// are ordered by a seeded tiebreak, so a seed fixes the whole interleaving.
class SimNet {
 public:
  SimNet(SimConfig config, std::vector<Transaction> initial_nyms = {});

  static std::vector<crypto::KeyPair> validator_keys(std::uint64_t seed, std::size_t n);

  const Block& genesis() const { return genesis_; }
  const GenesisConfig& genesis_config() const { return genesis_config_; }

  // Hands the transaction to validator `via` (first live node by default).
  std::optional<Rejection> submit(const Transaction& tx, std::optional<std::size_t> via = std::nullopt);
  // Submits and runs until a live validator commits it. Throws omic::Error
  // with the rejection code, or "timeout".
  Receipt submit_and_wait(const Transaction& tx, std::int64_t max_ticks = 200000);

  void tick();
  bool run_until(const std::function<bool()>& done, std::int64_t max_ticks);
  void run_for(std::int64_t ticks);

  void crash(std::size_t index);
  bool crashed(std::size_t index) const { return crashed_.count(index) > 0; }
  std::size_t size() const { return nodes_.size(); }
  const Replica& node(std::size_t i) const { return *nodes_[i]; }
  // First live validator; the read view used by clients.
  const Replica& reference() const;
  std::int64_t now() const { return now_; }
  std::uint64_t messages_delivered() const { return delivered_; }

  std::optional<Receipt> find_committed(const crypto::Digest32& tx_digest) const;
  // Every pair of live chains agrees on their common prefix.
  bool chains_consistent() const;

 private:
  struct InFlight {
    std::int64_t deliver_at;
    std::uint64_t tiebreak;
    std::uint64_t seq;
    std::size_t to;
    ConsensusMessage msg;
    bool operator>(const InFlight& o) const {
      return std::tie(deliver_at, tiebreak, seq) > std::tie(o.deliver_at, o.tiebreak, o.seq);
    }
  };

  void dispatch(std::size_t from, StepResult&& r);
  std::size_t index_of(const std::string& id) const;

  SimConfig config_;
  crypto::Drbg rng_;
  GenesisConfig genesis_config_;
  Block genesis_;
  std::vector<std::unique_ptr<Replica>> nodes_;
  std::set<std::size_t> crashed_;
  std::priority_queue<InFlight, std::vector<InFlight>, std::greater<>> queue_;
  std::int64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t delivered_ = 0;
};

}  // namespace omic::ledger
