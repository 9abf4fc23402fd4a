#include "omic/ledger/replica.hpp"

#include <algorithm>

#include "omic/error.hpp"

namespace omic::ledger {

void StepResult::merge(StepResult&& other) {
  for (auto& o : other.out) out.push_back(std::move(o));
  for (auto& b : other.committed) committed.push_back(std::move(b));
}

Replica::Replica(ReplicaConfig config, crypto::KeyPair key, const Block& genesis)
    : config_(std::move(config)),
      key_(std::move(key)),
      quorum_(quorum_size(config_.validators.size())),
      f_(fault_tolerance(config_.validators.size())) {
  if (config_.validators.size() < 4 || config_.validators.size() != 3 * f_ + 1) {
    throw Error("bad-parameters", "validator set must have n = 3f + 1 >= 4 members");
  }
  state_ = apply_block(state_, genesis, config_.validators);
  chain_.push_back(genesis);
  commit_views_.push_back(0);
}

const std::string& Replica::leader_of(std::int64_t view) const {
  return config_.validators[static_cast<std::size_t>(view) % config_.validators.size()].id;
}

void Replica::note(std::string line) {
  log_.push_back("[" + config_.self_id + " t=" + std::to_string(now_) + " v=" + std::to_string(view_) +
                 " h=" + std::to_string(next_height()) + "] " + std::move(line));
}

bool Replica::has_work() const {
  if (!mempool_.empty()) return true;
  auto it = proposals_.find(next_height());
  return it != proposals_.end() && !it->second.empty();
}

void Replica::broadcast(ConsensusMessage msg, StepResult& r) {
  msg.sender = config_.self_id;
  msg.sign(key_);
  r.out.push_back({"", msg});
  self_queue_.push_back(std::move(msg));
}

StepResult Replica::on_message(const ConsensusMessage& msg) {
  StepResult r;
  handle(msg, r);
  while (!self_queue_.empty()) {
    auto m = std::move(self_queue_.front());
    self_queue_.pop_front();
    handle(m, r);
  }
  return r;
}

StepResult Replica::submit(const Transaction& tx, std::optional<Rejection>* rejection) {
  StepResult r;
  std::optional<Rejection> rej;
  if (mempool_keys_.count(tx.replay_key()) ||
      (state_.validate(tx) && state_.validate(tx)->code == "replayed-nonce")) {
    rej = Rejection{"duplicate-submission", "transaction with this nonce already seen"};
  } else {
    rej = state_.validate(tx);
  }
  if (rejection) *rejection = rej;
  if (rej) {
    note("rejected submission: " + rej->code);
    return r;
  }
  handle_tx(tx);
  ConsensusMessage gossip;
  gossip.phase = Phase::kTx;
  gossip.view = view_;
  gossip.height = next_height();
  gossip.tx = tx;
  gossip.sender = config_.self_id;
  gossip.sign(key_);
  r.out.push_back({"", std::move(gossip)});
  return r;
}

StepResult Replica::on_tick(std::int64_t now) {
  StepResult r;
  now_ = now;
  const bool work = has_work();
  if (work && !had_work_) last_progress_ = now_;
  had_work_ = work;
  try_propose(r);
  if (work) {
    const auto timeout = config_.timeout_ticks << std::min(consecutive_view_changes_, 3);
    if (now_ - last_progress_ >= timeout) {
      note("timeout");
      enter_view(view_ + 1, r);
    }
  }
  while (!self_queue_.empty()) {
    auto m = std::move(self_queue_.front());
    self_queue_.pop_front();
    handle(m, r);
  }
  return r;
}

void Replica::handle(const ConsensusMessage& msg, StepResult& r) {
  const ValidatorInfo* sender = nullptr;
  for (const auto& v : config_.validators) {
    if (v.id == msg.sender) sender = &v;
  }
  if (!sender) {
    note("dropped message from unknown sender " + msg.sender);
    return;
  }
  if (msg.sender != config_.self_id &&
      !crypto::verify(sender->verkey, crypto::as_bytes(msg.signing_bytes()), msg.signature)) {
    note("dropped " + to_string(msg.phase) + " with bad signature from " + msg.sender);
    return;
  }
  switch (msg.phase) {
    case Phase::kPrePrepare:
      handle_pre_prepare(msg, r);
      break;
    case Phase::kPrepare:
    case Phase::kCommit:
      handle_vote(msg, r);
      break;
    case Phase::kViewChange:
      handle_view_change(msg, r);
      break;
    case Phase::kDecided:
      handle_decided(msg, r);
      break;
    case Phase::kTx:
      if (msg.tx) handle_tx(*msg.tx);
      break;
  }
}

void Replica::handle_tx(const Transaction& tx) {
  if (mempool_keys_.count(tx.replay_key())) return;
  if (auto rej = state_.validate(tx)) {
    note("ignored gossiped tx: " + rej->code);
    return;
  }
  mempool_keys_.insert(tx.replay_key());
  mempool_.push_back(tx);
}

void Replica::send_sync(const std::string& peer, std::int64_t their_height, StepResult& r) {
  if (peer == config_.self_id) return;
  auto from = std::max<std::int64_t>(their_height, synced_to_[peer]);
  for (auto h = std::max<std::int64_t>(from, 1); h < next_height(); ++h) {
    const auto& b = chain_[static_cast<std::size_t>(h)];
    ConsensusMessage d;
    d.phase = Phase::kDecided;
    d.view = b.quorum_certificate.empty() ? 0 : b.quorum_certificate.front().view;
    d.height = h;
    d.block_hash = b.hash();
    d.block = b;
    d.sender = config_.self_id;
    d.sign(key_);
    r.out.push_back({peer, std::move(d)});
  }
  synced_to_[peer] = std::max(synced_to_[peer], next_height());
}

void Replica::handle_pre_prepare(const ConsensusMessage& msg, StepResult& r) {
  const auto h = msg.height;
  const auto v = msg.view;
  if (!msg.block) return note("dropped PRE_PREPARE without block");
  if (h < next_height()) {
    send_sync(msg.sender, h, r);
    return note("dropped stale PRE_PREPARE");
  }
  if (h > next_height() || v > view_) {
    deferred_.push_back(msg);
    return;
  }
  if (v < view_) return note("dropped PRE_PREPARE from old view " + std::to_string(v));
  if (msg.sender != leader_of(v)) return note("dropped PRE_PREPARE from non-leader " + msg.sender);

  const Block& b = *msg.block;
  if (b.height != h || b.proposer != msg.sender || b.view != v || b.hash() != msg.block_hash) {
    return note("dropped inconsistent PRE_PREPARE");
  }
  if (b.prev_hash != state_.tip_hash()) return note("dropped PRE_PREPARE not extending tip");
  if (compute_tx_root(b.txs) != b.tx_root) return note("dropped PRE_PREPARE with bad tx_root");
  const ValidatorInfo* proposer = nullptr;
  for (const auto& val : config_.validators) {
    if (val.id == b.proposer) proposer = &val;
  }
  if (!crypto::verify(proposer->verkey, crypto::as_bytes(b.proposal_bytes()), b.proposer_signature)) {
    return note("dropped PRE_PREPARE with bad proposer signature");
  }
  if (accepted_.count({h, v})) return note("dropped second PRE_PREPARE for the same view");
  LedgerState scratch = state_;
  for (const auto& tx : b.txs) {
    if (auto rej = scratch.validate(tx)) return note("refused block with invalid tx: " + rej->code);
    scratch.apply(tx, h);
  }
  if (lock_ && lock_->height == h && lock_->cert.block_hash != msg.block_hash) {
    const bool unlock = msg.justify && msg.justify->block_hash == msg.block_hash &&
                        msg.justify->view > lock_->cert.view &&
                        verify_prepared(*msg.justify, h, config_.validators);
    if (!unlock) return note("refused proposal conflicting with lock");
  }

  accepted_[{h, v}] = msg.block_hash;
  proposals_[h][msg.block_hash] = b;
  ConsensusMessage prepare;
  prepare.phase = Phase::kPrepare;
  prepare.view = v;
  prepare.height = h;
  prepare.block_hash = msg.block_hash;
  broadcast(std::move(prepare), r);

  check_prepare({h, v, msg.block_hash}, r);
  std::vector<VoteKey> commit_keys;
  for (const auto& [key, _] : commits_) {
    if (std::get<0>(key) == h && std::get<2>(key) == msg.block_hash) commit_keys.push_back(key);
  }
  for (const auto& key : commit_keys) check_commit(key, r);
}

void Replica::handle_vote(const ConsensusMessage& msg, StepResult& r) {
  if (msg.height < next_height()) {
    send_sync(msg.sender, msg.height, r);
    return;
  }
  VoteKey key{msg.height, msg.view, msg.block_hash};
  auto& table = msg.phase == Phase::kPrepare ? prepares_ : commits_;
  table[key][msg.sender] = Vote{msg.sender, msg.view, msg.signature};
  if (msg.height != next_height()) return;
  if (msg.phase == Phase::kPrepare) {
    check_prepare(key, r);
  } else {
    check_commit(key, r);
  }
}

void Replica::check_prepare(const VoteKey& key, StepResult& r) {
  const auto [h, v, hash] = key;
  if (h != next_height() || v != view_ || commit_sent_.count({h, v})) return;
  auto acc = accepted_.find({h, v});
  if (acc == accepted_.end() || acc->second != hash) return;
  auto votes = prepares_.find(key);
  if (votes == prepares_.end() || votes->second.size() < quorum_) return;

  PreparedCertificate cert{v, hash, {}};
  for (const auto& [_, vote] : votes->second) cert.votes.push_back(vote);
  lock_ = Lock{h, std::move(cert)};
  commit_sent_.insert({h, v});

  ConsensusMessage commit_msg;
  commit_msg.phase = Phase::kCommit;
  commit_msg.view = v;
  commit_msg.height = h;
  commit_msg.block_hash = hash;
  broadcast(std::move(commit_msg), r);
}

void Replica::check_commit(const VoteKey& key, StepResult& r) {
  const auto [h, v, hash] = key;
  if (h != next_height()) return;
  auto votes = commits_.find(key);
  if (votes == commits_.end() || votes->second.size() < quorum_) return;
  auto known = proposals_.find(h);
  if (known == proposals_.end()) return;
  auto block = known->second.find(hash);
  if (block == known->second.end()) return;

  std::vector<Vote> qc;
  for (const auto& [_, vote] : votes->second) {
    if (qc.size() < quorum_) qc.push_back(vote);
  }
  commit(block->second, std::move(qc), v, r);
}

void Replica::commit(const Block& block, std::vector<Vote> votes, std::int64_t view, StepResult& r) {
  Block final_block = block;
  final_block.quorum_certificate = std::move(votes);
  append_block(final_block, view, r);
}

void Replica::append_block(const Block& block, std::int64_t view, StepResult& r) {
  try {
    state_ = apply_block(state_, block, config_.validators);
  } catch (const Error& e) {
    note(std::string("could not apply block: ") + e.what());
    return;
  }
  chain_.push_back(block);
  commit_views_.push_back(view);
  for (const auto& tx : block.txs) mempool_keys_.erase(tx.replay_key());
  std::erase_if(mempool_, [&](const Transaction& tx) { return !mempool_keys_.count(tx.replay_key()); });
  r.committed.push_back(block);
  note("committed block " + std::to_string(block.height) + " (" + std::to_string(block.txs.size()) + " txs)");
  after_height_change(r);
}

void Replica::after_height_change(StepResult& r) {
  const auto h = next_height();
  std::erase_if(proposals_, [&](const auto& kv) { return kv.first < h; });
  std::erase_if(accepted_, [&](const auto& kv) { return kv.first.first < h; });
  std::erase_if(prepares_, [&](const auto& kv) { return std::get<0>(kv.first) < h; });
  std::erase_if(commits_, [&](const auto& kv) { return std::get<0>(kv.first) < h; });
  std::erase_if(commit_sent_, [&](const auto& k) { return k.first < h; });
  std::erase_if(proposed_, [&](const auto& k) { return k.second < h; });
  std::erase_if(view_changes_, [&](const auto& kv) { return kv.first.second < h; });
  if (lock_ && lock_->height < h) lock_.reset();
  peer_views_.clear();
  entered_by_view_change_ = false;
  consecutive_view_changes_ = 0;
  last_progress_ = now_;
  last_block_time_ = now_;

  // Drop mempool entries the new state no longer admits.
  LedgerState scratch = state_;
  std::deque<Transaction> kept;
  for (auto& tx : mempool_) {
    if (!scratch.validate(tx)) {
      scratch.apply(tx, h);
      kept.push_back(std::move(tx));
    } else {
      mempool_keys_.erase(tx.replay_key());
    }
  }
  mempool_ = std::move(kept);
  had_work_ = has_work();

  auto pending = std::move(deferred_);
  deferred_.clear();
  for (const auto& m : pending) handle(m, r);
}

void Replica::handle_view_change(const ConsensusMessage& msg, StepResult& r) {
  const auto h = msg.height;
  if (h < next_height()) {
    send_sync(msg.sender, h, r);
    return;
  }
  if (h > next_height()) {
    deferred_.push_back(msg);
    ConsensusMessage req;
    req.phase = Phase::kDecided;
    req.view = view_;
    req.height = next_height();
    req.sender = config_.self_id;
    req.sign(key_);
    r.out.push_back({msg.sender, std::move(req)});
    return;
  }
  if (msg.justify) {
    if (!msg.block || msg.block->hash() != msg.justify->block_hash || msg.block->height != h ||
        msg.justify->view != msg.justify->votes.front().view ||
        !verify_prepared(*msg.justify, h, config_.validators)) {
      return note("dropped VIEW_CHANGE with invalid lock");
    }
  }
  view_changes_[{msg.view, h}][msg.sender] = msg;
  auto& pv = peer_views_[msg.sender];
  pv = std::max(pv, msg.view);

  if (msg.view > view_) {
    std::vector<std::int64_t> ahead;
    for (const auto& [peer, v] : peer_views_) {
      if (v > view_ && peer != config_.self_id) ahead.push_back(v);
    }
    if (ahead.size() >= f_ + 1) {
      std::sort(ahead.rbegin(), ahead.rend());
      enter_view(ahead[f_], r);
    }
  }
  try_propose(r);
}

void Replica::handle_decided(const ConsensusMessage& msg, StepResult& r) {
  if (!msg.block) {
    send_sync(msg.sender, msg.height, r);
    return;
  }
  if (msg.height < next_height()) return;
  if (msg.height > next_height()) {
    deferred_.push_back(msg);
    return;
  }
  append_block(*msg.block, msg.view, r);
}

void Replica::enter_view(std::int64_t view, StepResult& r) {
  if (view <= view_) return;
  view_ = view;
  entered_by_view_change_ = true;
  ++consecutive_view_changes_;
  last_progress_ = now_;
  note("entered view " + std::to_string(view));

  ConsensusMessage vc;
  vc.phase = Phase::kViewChange;
  vc.view = view;
  vc.height = next_height();
  if (lock_ && lock_->height == next_height()) {
    vc.block_hash = lock_->cert.block_hash;
    vc.block = proposals_[lock_->height].at(lock_->cert.block_hash);
    vc.justify = lock_->cert;
  }
  broadcast(std::move(vc), r);

  auto pending = std::move(deferred_);
  deferred_.clear();
  for (const auto& m : pending) handle(m, r);
  try_propose(r);
}

std::optional<Block> Replica::build_block(bool allow_empty) {
  Block b;
  b.height = next_height();
  b.prev_hash = state_.tip_hash();
  LedgerState scratch = state_;
  for (const auto& tx : mempool_) {
    if (b.txs.size() >= config_.max_block_txs) break;
    if (scratch.validate(tx)) continue;
    scratch.apply(tx, b.height);
    b.txs.push_back(tx);
  }
  if (b.txs.empty() && !allow_empty) return std::nullopt;
  b.tx_root = compute_tx_root(b.txs);
  return b;
}

void Replica::try_propose(StepResult& r) {
  if (leader_of(view_) != config_.self_id) return;
  const auto h = next_height();
  if (proposed_.count({view_, h})) return;

  if (entered_by_view_change_) {
    auto it = view_changes_.find({view_, h});
    if (it == view_changes_.end() || it->second.size() < quorum_) return;
    const ConsensusMessage* best = nullptr;
    for (const auto& [_, vc] : it->second) {
      if (vc.justify && (!best || vc.justify->view > best->justify->view)) best = &vc;
    }
    if (best) {
      propose(*best->block, best->justify, r);
      return;
    }
    // An empty block still settles the height for replicas holding a stale
    // proposal from the previous leader.
    if (auto b = build_block(true)) propose(std::move(*b), std::nullopt, r);
    return;
  }
  const bool heartbeat_due = config_.heartbeat_ticks > 0 && now_ - last_block_time_ >= config_.heartbeat_ticks;
  if (auto b = build_block(heartbeat_due)) propose(std::move(*b), std::nullopt, r);
}

void Replica::propose(Block block, std::optional<PreparedCertificate> justify, StepResult& r) {
  block.proposer = config_.self_id;
  block.view = view_;
  block.quorum_certificate.clear();
  block.validators.clear();
  block.proposer_signature = key_.sign(crypto::as_bytes(block.proposal_bytes()));
  proposed_.insert({view_, block.height});
  note("proposing block " + std::to_string(block.height) + " with " + std::to_string(block.txs.size()) + " txs");

  ConsensusMessage pp;
  pp.phase = Phase::kPrePrepare;
  pp.view = view_;
  pp.height = block.height;
  pp.block_hash = block.hash();
  pp.block = std::move(block);
  pp.justify = std::move(justify);
  broadcast(std::move(pp), r);
}

}  // namespace omic::ledger
