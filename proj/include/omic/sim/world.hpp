#pragma once

#include <deque>
#include <memory>

#include "omic/agent/message_bus.hpp"
#include "omic/exchange/actors.hpp"
#include "omic/exchange/recovery.hpp"

namespace omic::sim {

using json = nlohmann::json;

std::vector<exchange::BiomarkerSpec> default_panel();

struct WorldConfig {
  std::uint64_t seed = 1;
  int validators = 4;
  std::int64_t today = 20376;  // 2025-10-15
  exchange::ReviewPolicy review{};
  std::vector<exchange::BiomarkerSpec> panel = default_panel();
};

// Every actor of the exchange on one simulated ledger and one message bus.
// Agent randomness forks from the seed by actor name.
class World {
 public:
  explicit World(WorldConfig config);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  const WorldConfig& config() const { return config_; }
  ledger::SimNet& net() { return *net_; }
  agent::SimLedgerClient& client() { return *client_; }
  agent::MessageBus& bus() { return bus_; }
  exchange::BulletinBoard& board() { return *board_; }
  exchange::Myco& myco() { return *myco_; }
  exchange::EthicsBoard& erb() { return *erb_; }
  std::int64_t today() const { return today_; }
  void set_today(std::int64_t day) { today_ = day; }

  exchange::Researcher& add_researcher(const std::string& name);
  exchange::DataOwner& add_owner(const std::string& name, exchange::OwnerPolicy policy = {});
  exchange::Guardian& add_guardian(const std::string& name);

  agent::Agent& agent(const std::string& name);
  exchange::Researcher& researcher(const std::string& name);
  exchange::DataOwner& owner(const std::string& name);
  exchange::Guardian& guardian(const std::string& name);
  bool has_agent(const std::string& name) const { return agents_.count(name) > 0; }
  std::vector<std::string> agent_names() const;

  // Connects and drains the bus; returns {inviter side, invitee side}
  // connection ids. Cached per (inviter, invitee).
  std::pair<std::string, std::string> connect(const std::string& inviter, const std::string& invitee);

  void post(agent::Effects&& fx, agent::Agent& origin);
  std::size_t run();

  // High-level steps; each drains the bus before returning.
  std::string issue_biomarkers(const std::string& owner, const std::string& sample_id,
                               const std::vector<exchange::BiomarkerRecord>& records);
  json apply_ethics(const std::string& researcher, const exchange::ResearchProject& project);
  exchange::Advert publish(const std::string& researcher, const exchange::ResearchProject& project);
  std::string start_session(const std::string& owner, const std::string& advert_id);

  // Events the agents raised, {agent, event}, in order.
  const std::vector<json>& events() const { return events_; }

 private:
  agent::Agent& make_agent(const std::string& name);

  WorldConfig config_;
  std::int64_t today_;
  crypto::Drbg root_;
  std::unique_ptr<ledger::SimNet> net_;
  std::unique_ptr<agent::SimLedgerClient> client_;
  agent::MessageBus bus_;
  std::map<std::string, std::unique_ptr<agent::Agent>> agents_;
  std::unique_ptr<exchange::Myco> myco_;
  std::unique_ptr<exchange::EthicsBoard> erb_;
  std::unique_ptr<exchange::BulletinBoard> board_;
  std::map<std::string, std::unique_ptr<exchange::Researcher>> researchers_;
  std::map<std::string, std::unique_ptr<exchange::DataOwner>> owners_;
  std::map<std::string, std::unique_ptr<exchange::Guardian>> guardians_;
  std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>> connections_;
  std::vector<json> events_;
};

}  // namespace omic::sim
