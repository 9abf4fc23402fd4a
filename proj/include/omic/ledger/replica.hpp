#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "omic/ledger/consensus.hpp"
#include "omic/ledger/state.hpp"

namespace omic::ledger {

struct ReplicaConfig {
  std::vector<ValidatorInfo> validators;  // n = 3f + 1
  std::string self_id;
  std::int64_t timeout_ticks = 400;
  std::int64_t heartbeat_ticks = 500;  // 0 disables empty heartbeat blocks
  std::size_t max_block_txs = 64;
};

struct Outgoing {
  std::string to;  // empty: every other validator
  ConsensusMessage msg;
};

struct StepResult {
  std::vector<Outgoing> out;
  std::vector<Block> committed;
  void merge(StepResult&& other);
};

// One validator of the three-phase commit protocol. Transport-agnostic: every
// input returns the messages to send and any blocks that became final.
//
// Leader of view v is validators[v mod n]. A replica locks on a block once it
// has 2f+1 PREPAREs and afterwards only prepares a different block at that
// height when the proposal carries a prepared certificate from a later view.
// A new leader waits for 2f+1 VIEW_CHANGEs and re-proposes the highest locked
// block among them. Checkpointing and view-change proofs beyond that are
// omitted; only crash faults are tolerated.
class Replica {
 public:
  Replica(ReplicaConfig config, crypto::KeyPair key, const Block& genesis);

  StepResult on_message(const ConsensusMessage& msg);
  // Client submission. Validated against the committed state, added to the
  // mempool and gossiped. Rejections are returned through *rejection.
  StepResult submit(const Transaction& tx, std::optional<Rejection>* rejection);
  StepResult on_tick(std::int64_t now);

  const std::string& id() const { return config_.self_id; }
  const std::vector<Block>& chain() const { return chain_; }
  const LedgerState& state() const { return state_; }
  std::int64_t view() const { return view_; }
  std::int64_t next_height() const { return static_cast<std::int64_t>(chain_.size()); }
  std::size_t mempool_size() const { return mempool_.size(); }
  bool in_mempool(const std::string& replay_key) const { return mempool_keys_.count(replay_key) > 0; }
  // View in which each height was decided (genesis = 0).
  const std::vector<std::int64_t>& commit_views() const { return commit_views_; }
  const std::vector<std::string>& log() const { return log_; }
  const std::vector<ValidatorInfo>& validators() const { return config_.validators; }

  const std::string& leader_of(std::int64_t view) const;

 private:
  using VoteKey = std::tuple<std::int64_t, std::int64_t, crypto::Digest32>;  // height, view, hash

  struct Lock {
    std::int64_t height = -1;
    PreparedCertificate cert;
  };

  void handle(const ConsensusMessage& msg, StepResult& r);
  void handle_pre_prepare(const ConsensusMessage& msg, StepResult& r);
  void handle_vote(const ConsensusMessage& msg, StepResult& r);
  void handle_view_change(const ConsensusMessage& msg, StepResult& r);
  void handle_decided(const ConsensusMessage& msg, StepResult& r);
  void handle_tx(const Transaction& tx);

  void check_prepare(const VoteKey& key, StepResult& r);
  void check_commit(const VoteKey& key, StepResult& r);
  void commit(const Block& block, std::vector<Vote> votes, std::int64_t view, StepResult& r);
  void append_block(const Block& block, std::int64_t view, StepResult& r);
  void after_height_change(StepResult& r);

  void enter_view(std::int64_t view, StepResult& r);
  void try_propose(StepResult& r);
  std::optional<Block> build_block(bool allow_empty);
  void propose(Block block, std::optional<PreparedCertificate> justify, StepResult& r);

  void broadcast(ConsensusMessage msg, StepResult& r);
  void send_sync(const std::string& peer, std::int64_t their_height, StepResult& r);
  bool has_work() const;
  void note(std::string line);

  ReplicaConfig config_;
  crypto::KeyPair key_;
  std::size_t quorum_;
  std::size_t f_;

  std::vector<Block> chain_;
  LedgerState state_;
  std::int64_t view_ = 0;
  std::int64_t now_ = 0;
  std::int64_t last_progress_ = 0;
  std::int64_t last_block_time_ = 0;
  bool had_work_ = false;
  bool entered_by_view_change_ = false;
  int consecutive_view_changes_ = 0;

  std::deque<Transaction> mempool_;
  std::set<std::string> mempool_keys_;

  std::map<std::int64_t, std::map<crypto::Digest32, Block>> proposals_;
  std::map<std::pair<std::int64_t, std::int64_t>, crypto::Digest32> accepted_;  // (height, view)
  std::map<VoteKey, std::map<std::string, Vote>> prepares_;
  std::map<VoteKey, std::map<std::string, Vote>> commits_;
  std::set<std::pair<std::int64_t, std::int64_t>> commit_sent_;
  std::set<std::pair<std::int64_t, std::int64_t>> proposed_;
  std::optional<Lock> lock_;
  std::map<std::pair<std::int64_t, std::int64_t>, std::map<std::string, ConsensusMessage>> view_changes_;
  std::map<std::string, std::int64_t> peer_views_;  // highest VIEW_CHANGE view seen per peer at our height
  std::vector<ConsensusMessage> deferred_;           // future height / view proposals, DECIDED blocks
  std::map<std::string, std::int64_t> synced_to_;
  std::deque<ConsensusMessage> self_queue_;

  std::vector<std::int64_t> commit_views_;
  std::vector<std::string> log_;
};

}  // namespace omic::ledger
