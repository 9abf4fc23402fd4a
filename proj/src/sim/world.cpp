#include "omic/sim/world.hpp"

#include "omic/error.hpp"
#include "omic/ledger/builders.hpp"

namespace omic::sim {

std::vector<exchange::BiomarkerSpec> default_panel() {
  return {{"ldl", "mmol/L", 1, 100}, {"hba1c", "%", 1, 200}};
}

World::World(WorldConfig config) : config_(std::move(config)), today_(config_.today), root_(config_.seed) {
  bus_.on_event([this](agent::Agent& a, const json& ev) { events_.push_back({{"agent", a.label()}, {"event", ev}}); });
  auto day = [this] { return today_; };

  // MYco and the ERB are trusted from genesis.
  auto& myco = make_agent("MYco");
  auto& erb = make_agent("ERB");
  std::vector<ledger::Transaction> nyms;
  for (auto* a : {&myco, &erb}) nyms.push_back(ledger::make_nym(a->create_did(agent::Visibility::kPublic).key, "issuer", a->rng()));
  ledger::SimConfig sc;
  sc.seed = config_.seed;
  sc.validators = config_.validators;
  net_ = std::make_unique<ledger::SimNet>(sc, nyms);
  client_ = std::make_unique<agent::SimLedgerClient>(*net_);
  myco.set_ledger(client_.get());
  erb.set_ledger(client_.get());

  myco_ = std::make_unique<exchange::Myco>(myco, config_.panel);
  myco_->setup();
  erb_ = std::make_unique<exchange::EthicsBoard>(erb, config_.review, day);
  erb_->setup();
  board_ = std::make_unique<exchange::BulletinBoard>(*client_, erb_->cred_def_id(), day, root_.fork("board"));
}

agent::Agent& World::make_agent(const std::string& name) {
  if (agents_.count(name)) throw Error("duplicate", "actor " + name + " already exists");
  auto a = std::make_unique<agent::Agent>(name, root_.fork("agent:" + name), client_ ? client_.get() : nullptr);
  auto& ref = *a;
  bus_.attach(ref);
  agents_.emplace(name, std::move(a));
  return ref;
}

exchange::Researcher& World::add_researcher(const std::string& name) {
  auto& a = make_agent(name);
  auto r = std::make_unique<exchange::Researcher>(a, [this] { return today_; });
  r->setup();
  auto& ref = *r;
  researchers_.emplace(name, std::move(r));
  return ref;
}

exchange::DataOwner& World::add_owner(const std::string& name, exchange::OwnerPolicy policy) {
  auto& a = make_agent(name);
  auto o = std::make_unique<exchange::DataOwner>(a, erb_->cred_def_id(), [this] { return today_; }, std::move(policy));
  auto& ref = *o;
  owners_.emplace(name, std::move(o));
  return ref;
}

exchange::Guardian& World::add_guardian(const std::string& name) {
  auto& a = make_agent(name);
  auto g = std::make_unique<exchange::Guardian>(a);
  auto& ref = *g;
  guardians_.emplace(name, std::move(g));
  return ref;
}

agent::Agent& World::agent(const std::string& name) {
  auto it = agents_.find(name);
  if (it == agents_.end()) throw Error("unknown-actor", name);
  return *it->second;
}

exchange::Researcher& World::researcher(const std::string& name) {
  auto it = researchers_.find(name);
  if (it == researchers_.end()) throw Error("unknown-actor", name + " is not a researcher");
  return *it->second;
}

exchange::DataOwner& World::owner(const std::string& name) {
  auto it = owners_.find(name);
  if (it == owners_.end()) throw Error("unknown-actor", name + " is not a data owner");
  return *it->second;
}

exchange::Guardian& World::guardian(const std::string& name) {
  auto it = guardians_.find(name);
  if (it == guardians_.end()) throw Error("unknown-actor", name + " is not a guardian");
  return *it->second;
}

std::vector<std::string> World::agent_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : agents_) out.push_back(k);
  return out;
}

std::pair<std::string, std::string> World::connect(const std::string& inviter, const std::string& invitee) {
  const auto key = std::make_pair(inviter, invitee);
  if (auto it = connections_.find(key); it != connections_.end()) return it->second;
  auto& a = agent(inviter);
  auto& b = agent(invitee);
  const auto inv = a.create_invitation(inviter);
  auto [theirs, env] = b.accept_invitation(inv, invitee);
  bus_.post(env);
  run();
  std::string mine;
  for (const auto* c : a.list_connections()) {
    if (c->invitation_id == inv["id"]) mine = c->id;
  }
  if (mine.empty() || b.connection(theirs).state != "complete") throw Error("connect-failed", inviter + " <-> " + invitee);
  connections_[key] = {mine, theirs};
  return {mine, theirs};
}

void World::post(agent::Effects&& fx, agent::Agent& origin) { bus_.post(std::move(fx), origin); }

std::size_t World::run() { return bus_.run(); }

std::string World::issue_biomarkers(const std::string& owner_name, const std::string& sample_id,
                                    const std::vector<exchange::BiomarkerRecord>& records) {
  owner(owner_name);
  const auto conns = connect("MYco", owner_name);
  agent::Effects fx;
  const auto thread = myco_->issue(conns.first, sample_id, records, fx);
  post(std::move(fx), agent("MYco"));
  run();
  return thread;
}

json World::apply_ethics(const std::string& researcher_name, const exchange::ResearchProject& project) {
  auto& r = researcher(researcher_name);
  const auto conns = connect("ERB", researcher_name);
  agent::Effects fx;
  r.apply(conns.second, project, project.purpose, fx);
  post(std::move(fx), agent(researcher_name));
  run();
  auto d = r.decision(project.project_id);
  if (!d) throw Error("no-decision", "ERB did not answer");
  return *d;
}

exchange::Advert World::publish(const std::string& researcher_name, const exchange::ResearchProject& project) {
  return researcher(researcher_name).publish(*board_, project);
}

std::string World::start_session(const std::string& owner_name, const std::string& advert_id) {
  auto advert = board_->find(advert_id);
  if (!advert) throw Error("unknown-advert", advert_id);
  agent::Effects fx;
  const auto sid = owner(owner_name).start(*advert, fx);
  post(std::move(fx), agent(owner_name));
  run();
  return sid;
}

}  // namespace omic::sim
