#include "omic/sim/service.hpp"

#include <fstream>

#include <httplib.h>

#include "omic/error.hpp"
#include "omic/ledger/builders.hpp"

namespace omic::sim {

namespace {

using Handler = std::function<std::pair<int, json>(const httplib::Request&)>;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// Wraps a handler with the world lock, JSON errors and status mapping.
auto guarded(std::mutex& mu, Handler h) {
  return [&mu, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lk(mu);
    try {
      auto [status, body] = h(req);
      reply(res, status, body);
    } catch (const Error& e) {
      reply(res, http_status_for(e.code()), {{"error", e.code()}, {"message", e.what()}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", "malformed"}, {"message", e.what()}});
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("malformed", "request body must be a JSON object");
  return j;
}

}  // namespace

int http_status_for(const std::string& code) {
  if (code == "unknown-session" || code == "unknown-advert" || code == "unknown-actor") return 404;
  if (code == "bad-selection" || code == "bad-parameters" || code == "insufficient-shares" ||
      code == "checksum-mismatch" || code == "bad-org-type" || code == "no-certificate" ||
      code == "certificate-rejected") {
    return 422;
  }
  if (code == "out-of-order" || code == "session-closed" || code == "duplicate" || code == "no-recovery") return 409;
  return 400;
}

OwnerService::OwnerService(World& world, std::string owner, std::mutex& mu)
    : world_(world), owner_(std::move(owner)), mu_(mu) {
  world_.owner(owner_);
}

json OwnerService::credentials_json() const {
  json out = json::array();
  const auto& state = world_.client().state();
  for (const auto& hc : world_.owner(owner_).holder().credentials()) {
    json attrs = json::object();
    for (const auto& a : hc.credential.attributes) attrs[a.name] = a.value;
    bool revoked = false;
    try {
      revoked = state.is_revoked(ledger::registry_id_for(hc.credential.cred_def_id), hc.credential.revocation_handle,
                                 state.height());
    } catch (const Error&) {
    }
    out.push_back({{"id", hc.id}, {"cred_def_id", hc.credential.cred_def_id}, {"attributes", attrs}, {"revoked", revoked}});
  }
  return out;
}

void OwnerService::flush(const std::filesystem::path& path, std::string_view passphrase) {
  std::lock_guard lk(mu_);
  auto& a = world_.agent(owner_);
  const auto sealed = agent::wallet_save(a.wallet(), passphrase, a.rng());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(sealed.data()), static_cast<std::streamsize>(sealed.size()));
  if (!out) throw Error("io", "cannot write " + path.string());
}

void OwnerService::mount(httplib::Server& server) {
  auto& w = world_;
  const auto name = owner_;
  auto session_json = [&w, name](const std::string& id) { return w.owner(name).session(id).to_json(); };

  server.Get("/projects", guarded(mu_, [&w](const httplib::Request& req) {
               json out = json::array();
               for (const auto& a : w.board().list(req.get_param_value("org_type"))) out.push_back(a.to_json());
               return std::pair{200, out};
             }));
  server.Get("/credentials", guarded(mu_, [this](const httplib::Request&) {
               return std::pair{200, credentials_json()};
             }));
  server.Get(R"(/sessions/([^/]+))", guarded(mu_, [session_json](const httplib::Request& req) {
               return std::pair{200, session_json(req.matches[1])};
             }));
  server.Post("/sessions", guarded(mu_, [&w, name, session_json](const httplib::Request& req) {
                const auto b = body_of(req);
                const auto sid = w.start_session(name, b.at("advert_id").get<std::string>());
                return std::pair{201, session_json(sid)};
              }));
  server.Post(R"(/sessions/([^/]+)/eligibility-approve)",
              guarded(mu_, [&w, name, session_json](const httplib::Request& req) {
                const std::string sid = req.matches[1];
                agent::Effects fx;
                w.owner(name).approve_eligibility(sid, fx);
                w.post(std::move(fx), w.agent(name));
                w.run();
                return std::pair{200, session_json(sid)};
              }));
  server.Post(R"(/sessions/([^/]+)/consent)", guarded(mu_, [&w, name, session_json](const httplib::Request& req) {
                const std::string sid = req.matches[1];
                const auto b = body_of(req);
                agent::Effects fx;
                w.owner(name).consent(sid, b.at("selected_attrs").get<std::vector<std::string>>(), fx);
                w.post(std::move(fx), w.agent(name));
                w.run();
                return std::pair{200, session_json(sid)};
              }));
  server.Post(R"(/sessions/([^/]+)/abort)", guarded(mu_, [&w, name, session_json](const httplib::Request& req) {
                const std::string sid = req.matches[1];
                const auto b = body_of(req);
                agent::Effects fx;
                w.owner(name).abort(sid, b.value("reason", "declined"), fx);
                w.post(std::move(fx), w.agent(name));
                w.run();
                return std::pair{200, session_json(sid)};
              }));
  server.Get("/rewards", guarded(mu_, [&w, name](const httplib::Request&) {
               return std::pair{200, json(w.owner(name).rewards())};
             }));
  server.Post("/recovery/config", guarded(mu_, [this, &w, name](const httplib::Request& req) {
                const auto b = body_of(req);
                std::vector<std::string> conns;
                for (const auto& g : b.at("guardians").get<std::vector<std::string>>()) {
                  w.guardian(g);
                  conns.push_back(w.connect(g, name).second);
                }
                auto& a = w.agent(name);
                const auto salt = a.rng().bytes(16);
                const auto key = agent::derive_wallet_key(b.value("passphrase", ""), salt);
                agent::Effects fx;
                const auto cfg = exchange::configure_recovery(a, conns, b.at("k").get<int>(), key, fx);
                w.post(std::move(fx), a);
                w.run();
                backup_ = Backup{cfg, agent::wallet_save_with_key(a.wallet(), key, salt, a.rng())};
                return std::pair{200, cfg.to_json()};
              }));
  server.Post("/recovery/restore", guarded(mu_, [this, &w, name](const httplib::Request& req) {
                if (!backup_) throw Error("no-recovery", "recovery is not configured");
                const auto b = body_of(req);
                std::vector<crypto::SecretShare> shares;
                for (const auto& g : b.at("guardians").get<std::vector<std::string>>()) {
                  if (auto s = w.guardian(g).release(backup_->config.owner_ref)) shares.push_back(*s);
                }
                auto restored = exchange::recover_wallet(shares, backup_->sealed);
                w.agent(name).replace_wallet(std::move(restored));
                w.owner(name).reload();
                return std::pair{200, json{{"restored", true}, {"sessions", w.owner(name).sessions().size()}}};
              }));
}

void BoardService::mount(httplib::Server& server) {
  auto& w = world_;
  server.Get("/adverts", guarded(mu_, [&w](const httplib::Request& req) {
               json out = json::array();
               for (const auto& a : w.board().list(req.get_param_value("org_type"))) out.push_back(a.to_json());
               return std::pair{200, out};
             }));
  server.Get("/adverts/challenge", guarded(mu_, [this, &w](const httplib::Request&) {
               auto c = w.board().challenge();
               const auto j = c.to_json();
               challenges_[crypto::to_hex(c.nonce)] = std::move(c);
               return std::pair{200, j};
             }));
  server.Post("/adverts", guarded(mu_, [this, &w](const httplib::Request& req) {
                const auto b = body_of(req);
                const auto advert = exchange::Advert::from_json(b.at("advert"));
                std::optional<credentials::Presentation> p;
                if (b.contains("certificate") && !b["certificate"].is_null()) {
                  p = credentials::Presentation::from_json(b["certificate"]);
                }
                if (!p) throw Error("no-certificate", "an ethics certificate presentation is required");
                auto it = challenges_.find(crypto::to_hex(p->nonce));
                if (it == challenges_.end()) throw Error("certificate-rejected", "unknown or spent challenge");
                const auto challenge = it->second;
                challenges_.erase(it);
                return std::pair{201, w.board().publish(advert, p, challenge).to_json()};
              }));
}

}  // namespace omic::sim
