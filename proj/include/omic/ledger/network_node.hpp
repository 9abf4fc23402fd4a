#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "omic/ledger/block_log.hpp"
#include "omic/ledger/replica.hpp"
#include "omic/ledger/socket_transport.hpp"

namespace omic::ledger {

struct NodeOptions {
  GenesisConfig genesis;
  std::string self_id;
  crypto::KeyPair key;
  std::string listen_host = "127.0.0.1";
  std::uint16_t listen_port = 0;
  // Peer addresses by validator id; filled from the genesis addresses when empty.
  std::map<std::string, std::string> peers;
  std::filesystem::path block_log;  // appended on commit, genesis first
  std::chrono::milliseconds tick{1};
  std::int64_t timeout_ticks = 400;
  std::int64_t heartbeat_ticks = 0;
};

// A validator on the socket transport. Frames:
//   {"kind":"consensus","msg":{...}}   peer to peer, no reply
//   {"kind":"submit","tx":{...}}       reply {"ok":bool,"code","message"}
//   {"kind":"status"}                  reply {"id","height","view","tip"}
// One mutex serializes every replica step.
class NetworkNode {
 public:
  explicit NetworkNode(NodeOptions options);
  ~NetworkNode();
  NetworkNode(const NetworkNode&) = delete;
  NetworkNode& operator=(const NetworkNode&) = delete;

  // Before start() only.
  void set_peer(const std::string& id, const std::string& address) { options_.peers[id] = address; }
  void start();
  void stop();
  std::uint16_t port() const { return listener_.port(); }
  std::vector<Block> chain() const;
  nlohmann::json status() const;

 private:
  void accept_loop();
  void serve(FrameSocket& sock);
  void tick_loop();
  void send_loop();
  // Caller holds mu_, so the log follows commit order.
  void log_commits(const StepResult& r);
  void dispatch(StepResult&& r);

  NodeOptions options_;
  mutable std::mutex mu_;
  std::unique_ptr<Replica> replica_;
  FrameListener listener_;
  std::atomic<bool> running_{false};
  std::thread accept_thread_, tick_thread_, send_thread_;
  std::mutex conns_mu_;
  std::vector<std::shared_ptr<FrameSocket>> inbound_;
  std::vector<std::thread> readers_;
  std::mutex out_mu_;
  std::condition_variable out_cv_;
  std::map<std::string, std::deque<nlohmann::json>> outbox_;
};

std::pair<std::string, std::uint16_t> split_address(const std::string& addr);

// Client helpers for a running node.
nlohmann::json node_request(const std::string& address, const nlohmann::json& frame);

}  // namespace omic::ledger
