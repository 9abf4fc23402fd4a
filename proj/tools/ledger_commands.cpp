#include "ledger_commands.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "omic/error.hpp"
#include "omic/ledger/network_node.hpp"
#include "omic/ledger/simnet.hpp"

namespace omic::tools {

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct GenesisArgs {
  std::size_t validators = 4;
  std::uint64_t seed = 1;
  int base_port = 9700;
  std::string host = "127.0.0.1";
  std::string out = ".";
};

struct RunArgs {
  std::string genesis, node, listen, key, log;
};

}  // namespace

void add_ledger_commands(CLI::App& parent, int& rc) {
  auto* genesis = parent.add_subcommand("genesis", "write a genesis file and validator key files for a local network");
  auto g = std::make_shared<GenesisArgs>();
  genesis->add_option("--validators", g->validators, "validator count")->capture_default_str();
  genesis->add_option("--seed", g->seed, "key seed")->capture_default_str();
  genesis->add_option("--base-port", g->base_port, "node i listens on base-port + i")->capture_default_str();
  genesis->add_option("--host", g->host)->capture_default_str();
  genesis->add_option("--out", g->out, "output directory")->capture_default_str();
  genesis->callback([g, &rc] {
    const auto& [n, seed, base, host, out] = *g;
    std::filesystem::create_directories(out);
    const auto keys = ledger::SimNet::validator_keys(seed, n);
    ledger::GenesisConfig cfg;
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = "node-" + std::to_string(i);
      cfg.validators.push_back({id, keys[i].verification_key(), host + ":" + std::to_string(base + static_cast<int>(i))});
      std::ofstream(std::filesystem::path(out) / (id + ".key")) << crypto::to_hex(crypto::ByteView(keys[i].signing_key().data(), 32)) << '\n';
    }
    ledger::write_genesis_file(std::filesystem::path(out) / "genesis.jsonl", cfg);
    std::cout << "wrote " << n << " validators to " << out << "\n";
    rc = 0;
  });

  auto* run = parent.add_subcommand("run", "run one validator on the socket transport until SIGINT/SIGTERM");
  auto r = std::make_shared<RunArgs>();
  run->add_option("--genesis", r->genesis)->required()->check(CLI::ExistingFile);
  run->add_option("--node", r->node, "validator id, e.g. node-0")->required();
  run->add_option("--listen", r->listen, "host:port; defaults to the genesis address");
  run->add_option("--key", r->key, "hex seed file; defaults to <genesis dir>/<node>.key");
  run->add_option("--log", r->log, "block log path; defaults to <node>.blocks.jsonl");
  run->callback([r, &rc] {
    const auto& [genesis_path, node, listen, key_path, log] = *r;
    ledger::NodeOptions o;
    o.genesis = ledger::read_genesis_file(genesis_path);
    o.self_id = node;
    std::string address = listen;
    for (const auto& v : o.genesis.validators) {
      if (v.id == node && address.empty()) address = v.address;
    }
    if (address.empty()) throw Error("bad-address", "no --listen and no genesis address for " + node);
    std::tie(o.listen_host, o.listen_port) = ledger::split_address(address);
    const auto kp = key_path.empty() ? std::filesystem::path(genesis_path).parent_path() / (node + ".key")
                                     : std::filesystem::path(key_path);
    std::ifstream kin(kp);
    std::string hex;
    if (!(kin >> hex)) throw Error("io", "cannot read key file " + kp.string());
    o.key = crypto::KeyPair::from_seed(crypto::from_hex(hex));
    o.block_log = log.empty() ? std::filesystem::path(node + ".blocks.jsonl") : std::filesystem::path(log);
    ledger::NetworkNode n(o);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    n.start();
    std::cerr << node << " listening on " << o.listen_host << ":" << n.port() << "\n";
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    n.stop();
    std::cerr << node << " stopped at " << n.status().dump() << "\n";
    rc = 0;
  });

  auto* verify = parent.add_subcommand("verify", "check every link, signature, certificate and transaction of a block log");
  auto path = std::make_shared<std::string>();
  verify->add_option("--log", *path)->required()->check(CLI::ExistingFile);
  verify->callback([path, &rc] {
    const auto v = ledger::verify_chain_lines(ledger::read_lines(*path));
    std::cout << nlohmann::json{{"ok", v.ok}, {"verified_height", v.verified_height}, {"failure", v.failure}}.dump()
              << "\n";
    rc = v.ok ? 0 : 1;
  });
}

}  // namespace omic::tools
