#include "omic/ledger/network_node.hpp"

#include <fstream>

#include "omic/error.hpp"

namespace omic::ledger {

using nlohmann::json;

std::pair<std::string, std::uint16_t> split_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error("bad-address", "expected host:port, got " + addr);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error("bad-address", "bad port in " + addr);
  }
  if (port < 0 || port > 65535) throw Error("bad-address", "bad port in " + addr);
  return {addr.substr(0, colon), static_cast<std::uint16_t>(port)};
}

json node_request(const std::string& address, const json& frame) {
  const auto [host, port] = split_address(address);
  auto sock = FrameSocket::connect(host, port);
  sock.send(frame);
  auto reply = sock.receive();
  if (!reply) throw Error("io", "node closed the connection");
  return *reply;
}

NetworkNode::NetworkNode(NodeOptions options)
    : options_(std::move(options)), listener_(options_.listen_host, options_.listen_port) {
  bool member = false;
  for (const auto& v : options_.genesis.validators) {
    if (v.id == options_.self_id) member = v.verkey == options_.key.verification_key();
    if (v.id != options_.self_id && !options_.peers.count(v.id) && !v.address.empty()) options_.peers[v.id] = v.address;
  }
  if (!member) throw Error("not-a-validator", options_.self_id + " with this key is not in the genesis set");
  ReplicaConfig rc{options_.genesis.validators, options_.self_id, options_.timeout_ticks, options_.heartbeat_ticks, 64};
  const auto genesis = make_genesis_block(options_.genesis);
  replica_ = std::make_unique<Replica>(rc, options_.key, genesis);
  if (!options_.block_log.empty()) {
    std::ofstream out(options_.block_log, std::ios::trunc);
    out << block_log_line(genesis) << '\n';
  }
}

NetworkNode::~NetworkNode() { stop(); }

void NetworkNode::start() {
  if (running_.exchange(true)) return;
  accept_thread_ = std::thread([this] { accept_loop(); });
  tick_thread_ = std::thread([this] { tick_loop(); });
  send_thread_ = std::thread([this] { send_loop(); });
}

void NetworkNode::stop() {
  if (!running_.exchange(false)) return;
  listener_.shutdown();
  out_cv_.notify_all();
  {
    std::lock_guard lk(conns_mu_);
    for (auto& s : inbound_) s->shutdown();
  }
  accept_thread_.join();
  tick_thread_.join();
  send_thread_.join();
  for (auto& t : readers_) t.join();
  readers_.clear();
}

std::vector<Block> NetworkNode::chain() const {
  std::lock_guard lk(mu_);
  return replica_->chain();
}

json NetworkNode::status() const {
  std::lock_guard lk(mu_);
  return {{"id", replica_->id()},
          {"height", replica_->next_height() - 1},
          {"view", replica_->view()},
          {"tip", replica_->chain().back().hash().hex()}};
}

void NetworkNode::accept_loop() {
  while (running_) {
    try {
      auto sock = std::make_shared<FrameSocket>(listener_.accept());
      std::lock_guard lk(conns_mu_);
      if (!running_) {
        sock->shutdown();
        break;
      }
      inbound_.push_back(sock);
      readers_.emplace_back([this, sock] { serve(*sock); });
    } catch (const Error&) {
      if (!running_) break;
    }
  }
}

void NetworkNode::serve(FrameSocket& sock) {
  try {
    while (auto frame = sock.receive()) {
      const auto kind = frame->value("kind", "");
      if (kind == "consensus") {
        StepResult r;
        try {
          const auto msg = ConsensusMessage::from_json(frame->at("msg"));
          std::lock_guard lk(mu_);
          r = replica_->on_message(msg);
          log_commits(r);
        } catch (const std::exception&) {
          continue;  // malformed peer input is dropped
        }
        dispatch(std::move(r));
      } else if (kind == "submit") {
        std::optional<Rejection> rej;
        StepResult r;
        try {
          const auto tx = Transaction::from_json(frame->at("tx"));
          std::lock_guard lk(mu_);
          r = replica_->submit(tx, &rej);
          log_commits(r);
        } catch (const std::exception& e) {
          rej = Rejection{"malformed", e.what()};
        }
        dispatch(std::move(r));
        sock.send(rej ? json{{"ok", false}, {"code", rej->code}, {"message", rej->detail}} : json{{"ok", true}});
      } else if (kind == "status") {
        sock.send(status());
      } else {
        sock.send({{"ok", false}, {"code", "malformed"}, {"message", "unknown frame kind"}});
      }
    }
  } catch (const Error&) {
  }
}

void NetworkNode::tick_loop() {
  const auto t0 = std::chrono::steady_clock::now();
  while (running_) {
    std::this_thread::sleep_for(options_.tick);
    const auto now = (std::chrono::steady_clock::now() - t0) / options_.tick;
    StepResult r;
    {
      std::lock_guard lk(mu_);
      r = replica_->on_tick(static_cast<std::int64_t>(now));
      log_commits(r);
    }
    dispatch(std::move(r));
  }
}

void NetworkNode::log_commits(const StepResult& r) {
  if (r.committed.empty() || options_.block_log.empty()) return;
  std::ofstream out(options_.block_log, std::ios::app);
  for (const auto& b : r.committed) out << block_log_line(b) << '\n';
}

void NetworkNode::dispatch(StepResult&& r) {
  if (r.out.empty()) return;
  std::lock_guard lk(out_mu_);
  for (auto& o : r.out) {
    const json frame = {{"kind", "consensus"}, {"msg", o.msg.to_json()}};
    if (o.to.empty()) {
      for (const auto& [id, addr] : options_.peers) outbox_[id].push_back(frame);
    } else if (options_.peers.count(o.to)) {
      outbox_[o.to].push_back(frame);
    }
  }
  out_cv_.notify_all();
}

void NetworkNode::send_loop() {
  // Messages to unreachable peers stay queued, up to a bound, and are
  // retried; the protocol tolerates the resulting delay as a slow link.
  constexpr std::size_t kMaxQueued = 4096;
  std::map<std::string, std::unique_ptr<FrameSocket>> conns;
  while (running_) {
    std::map<std::string, std::deque<json>> batch;
    {
      std::unique_lock lk(out_mu_);
      out_cv_.wait_for(lk, std::chrono::milliseconds(20), [&] {
        if (!running_) return true;
        for (const auto& [id, q] : outbox_) {
          if (!q.empty()) return true;
        }
        return false;
      });
      batch.swap(outbox_);
    }
    for (auto& [id, q] : batch) {
      while (!q.empty()) {
        try {
          auto& c = conns[id];
          if (!c) {
            const auto [host, port] = split_address(options_.peers.at(id));
            c = std::make_unique<FrameSocket>(FrameSocket::connect(host, port));
          }
          c->send(q.front());
          q.pop_front();
        } catch (const Error&) {
          conns.erase(id);
          break;
        }
      }
      if (!q.empty()) {
        std::lock_guard lk(out_mu_);
        auto& pending = outbox_[id];
        pending.insert(pending.begin(), q.begin(), q.end());
        while (pending.size() > kMaxQueued) pending.pop_front();
      }
    }
    if (!batch.empty()) {
      bool backlog = false;
      {
        std::lock_guard lk(out_mu_);
        for (const auto& [id, q] : outbox_) backlog = backlog || !q.empty();
      }
      if (backlog) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
}

}  // namespace omic::ledger
