#include "omic/ledger/simnet.hpp"

#include "omic/error.hpp"

namespace omic::ledger {

std::vector<crypto::KeyPair> SimNet::validator_keys(std::uint64_t seed, std::size_t n) {
  crypto::Drbg root(seed);
  std::vector<crypto::KeyPair> keys;
  for (std::size_t i = 0; i < n; ++i) {
    keys.push_back(crypto::generate_keypair(root.fork("validator-" + std::to_string(i)).bytes(32)));
  }
  return keys;
}

SimNet::SimNet(SimConfig config, std::vector<Transaction> initial_nyms)
    : config_(config), rng_(crypto::Drbg(config.seed).fork("scheduler")) {
  auto keys = validator_keys(config_.seed, config_.validators);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    genesis_config_.validators.push_back({"node-" + std::to_string(i), keys[i].verification_key(), ""});
  }
  genesis_config_.nyms = std::move(initial_nyms);
  genesis_ = make_genesis_block(genesis_config_);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ReplicaConfig rc{genesis_config_.validators, genesis_config_.validators[i].id, config_.timeout_ticks,
                     config_.heartbeat_ticks, 64};
    nodes_.push_back(std::make_unique<Replica>(rc, keys[i], genesis_));
  }
}

std::size_t SimNet::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i]->id() == id) return i;
  }
  throw Error("unknown-node", "no validator " + id);
}

const Replica& SimNet::reference() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!crashed(i)) return *nodes_[i];
  }
  throw Error("no-live-node", "every validator has crashed");
}

void SimNet::dispatch(std::size_t from, StepResult&& r) {
  if (crashed(from)) return;
  const auto span = static_cast<std::uint64_t>(config_.max_delay - config_.min_delay + 1);
  for (auto& o : r.out) {
    std::vector<std::size_t> targets;
    if (o.to.empty()) {
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (i != from) targets.push_back(i);
      }
    } else {
      targets.push_back(index_of(o.to));
    }
    for (auto t : targets) {
      const auto delay = config_.min_delay + static_cast<std::int64_t>(rng_.uniform(span));
      queue_.push({now_ + delay, rng_.uniform(1ULL << 32), seq_++, t, o.msg});
    }
  }
}

std::optional<Rejection> SimNet::submit(const Transaction& tx, std::optional<std::size_t> via) {
  std::size_t target = via.value_or(index_of(reference().id()));
  if (crashed(target)) return Rejection{"unavailable", "validator is down"};
  std::optional<Rejection> rej;
  auto r = nodes_[target]->submit(tx, &rej);
  dispatch(target, std::move(r));
  return rej;
}

std::optional<Receipt> SimNet::find_committed(const crypto::Digest32& tx_digest) const {
  for (const auto& b : reference().chain()) {
    for (const auto& tx : b.txs) {
      if (tx.digest() == tx_digest) return Receipt{b.height, tx_digest};
    }
  }
  return std::nullopt;
}

Receipt SimNet::submit_and_wait(const Transaction& tx, std::int64_t max_ticks) {
  const auto digest = tx.digest();
  if (auto rej = submit(tx)) {
    if (rej->code == "duplicate-submission") {
      if (auto existing = find_committed(digest)) return *existing;
      // still pending: fall through and wait for it
    } else {
      throw Error(rej->code, rej->detail);
    }
  }
  std::optional<Receipt> receipt;
  run_until([&] { return (receipt = find_committed(digest)).has_value(); }, max_ticks);
  if (!receipt) throw Error("timeout", "transaction not committed in time");
  return *receipt;
}

void SimNet::tick() {
  ++now_;
  while (!queue_.empty() && queue_.top().deliver_at <= now_) {
    auto item = queue_.top();
    queue_.pop();
    if (crashed(item.to)) continue;
    ++delivered_;
    dispatch(item.to, nodes_[item.to]->on_message(item.msg));
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!crashed(i)) dispatch(i, nodes_[i]->on_tick(now_));
  }
}

bool SimNet::run_until(const std::function<bool()>& done, std::int64_t max_ticks) {
  for (std::int64_t i = 0; i < max_ticks; ++i) {
    if (done()) return true;
    tick();
  }
  return done();
}

void SimNet::run_for(std::int64_t ticks) {
  for (std::int64_t i = 0; i < ticks; ++i) tick();
}

void SimNet::crash(std::size_t index) { crashed_.insert(index); }

bool SimNet::chains_consistent() const {
  for (std::size_t a = 0; a < nodes_.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes_.size(); ++b) {
      if (crashed(a) || crashed(b)) continue;
      const auto& ca = nodes_[a]->chain();
      const auto& cb = nodes_[b]->chain();
      const auto common = std::min(ca.size(), cb.size());
      for (std::size_t h = 0; h < common; ++h) {
        if (ca[h].hash() != cb[h].hash()) return false;
      }
    }
  }
  return true;
}

}  // namespace omic::ledger
