#include <csignal>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "ledger_commands.hpp"
#include "omic/error.hpp"
#include "omic/ledger/network_node.hpp"
#include "omic/sim/audit.hpp"
#include "omic/sim/scenario.hpp"
#include "omic/sim/service.hpp"

using namespace omic;
using json = nlohmann::json;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "artifacts";
};

struct ServeArgs {
  std::string role;
  std::string config;
  std::string listen = "127.0.0.1:8080";
};

int cmd_run(const RunArgs& a) {
  auto cfg = sim::ScenarioConfig::load(a.config);
  if (a.seed) cfg.world.seed = *a.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = sim::run_scenario(cfg, a.out);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& act : r.actions) {
    std::cout << (act.ok ? "ok   " : "FAIL ") << act.index << " " << act.action << " " << act.detail.dump() << "\n";
  }
  std::cout << "rewarded=" << r.summary["rewarded"] << " height=" << r.summary["height"]
            << " transcript=" << r.transcript_digest << " blocks=" << r.block_log_digest << " (" << ms << " ms)\n";
  return r.ok ? 0 : 1;
}

int cmd_audit(const std::string& kind, const std::string& dir) {
  if (kind == "phi") {
    const auto findings = sim::phi_scan_artifacts(dir);
    json out = {{"findings", json::array()}, {"pass", findings.empty()}};
    for (const auto& f : findings) out["findings"].push_back(f.to_json());
    std::cout << out.dump(2) << "\n";
    return findings.empty() ? 0 : 1;
  }
  const auto report = sim::unlinkability_audit_artifacts(dir);
  std::cout << report.to_json().dump(2) << "\n";
  return report.pass ? 0 : 1;
}

int cmd_serve(const ServeArgs& a) {
  auto cfg = sim::ScenarioConfig::load(a.config);
  sim::ScenarioRunner runner(cfg);
  const auto result = runner.run();
  if (!result.ok) std::cerr << "warning: scenario script did not fully succeed\n";
  std::mutex mu;
  httplib::Server server;
  std::optional<sim::OwnerService> owner;
  std::optional<sim::BoardService> board;
  if (a.role == "owner") {
    auto name = cfg.serve.value("owner", cfg.owners.empty() ? std::string() : cfg.owners.front().first);
    owner.emplace(runner.world(), name, mu);
    owner->mount(server);
  } else {
    board.emplace(runner.world(), mu);
    board->mount(server);
  }
  const auto [host, port] = ledger::split_address(a.listen);
  if (!server.bind_to_port(host, port)) throw Error("port-in-use", "cannot listen on " + a.listen);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving " << a.role << " on " << a.listen << "\n";
  server.listen_after_bind();
  g_server = nullptr;
  if (owner) {
    const auto path = cfg.serve.value("wallet", "owner-wallet.bin");
    owner->flush(path, cfg.serve.value("passphrase", ""));
    std::cerr << "wallet flushed to " << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"omicledger: health-data exchange simulator, audits and services"};
  app.require_subcommand(1);
  int rc = 1;

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a scenario and write its artifacts");
  run->add_option("--config", run_args.config)->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "override the config seed");
  run->add_option("--out", run_args.out, "artifact directory")->capture_default_str();
  run->callback([&] { rc = cmd_run(run_args); });

  std::string artifacts;
  auto* audit = app.add_subcommand("audit", "privacy audits over a run's artifacts");
  audit->require_subcommand(1);
  for (const std::string kind : {"phi", "unlink"}) {
    auto* sub = audit->add_subcommand(kind, kind == "phi" ? "sentinel scan of the block log and board"
                                                          : "identifiers shared across researchers");
    sub->add_option("--artifacts", artifacts)->required()->check(CLI::ExistingDirectory);
    sub->callback([&, kind] { rc = cmd_audit(kind, artifacts); });
  }

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "run a scenario, then serve the owner agent or bulletin board over HTTP");
  serve->add_option("--role", serve_args.role)->required()->check(CLI::IsMember({"owner", "board"}));
  serve->add_option("--config", serve_args.config)->required()->check(CLI::ExistingFile);
  serve->add_option("--listen", serve_args.listen)->capture_default_str();
  serve->callback([&] { rc = cmd_serve(serve_args); });

  auto* ledger = app.add_subcommand("ledger", "validator node and block-log tools");
  ledger->require_subcommand(1);
  omic::tools::add_ledger_commands(*ledger, rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 2;
  }
  return rc;
}
