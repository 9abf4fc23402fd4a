#include "omic/agent/wallet.hpp"

#include <sodium.h>

#include "omic/error.hpp"

namespace omic::agent {

namespace {

json key_json(const crypto::KeyPair& k) { return crypto::to_hex(k.signing_key()); }
crypto::KeyPair key_from(const json& j) { return crypto::KeyPair::from_seed(crypto::from_hex(j.get<std::string>())); }

json did_json(const Did& d) {
  return {{"id", d.id}, {"seed", key_json(d.key)}, {"visibility", to_string(d.visibility)}};
}

Did did_from(const json& j) {
  return {j.at("id").get<std::string>(), key_from(j.at("seed")),
          visibility_from_string(j.at("visibility").get<std::string>())};
}

}  // namespace

json WalletStore::to_json() const {
  json j;
  j["label"] = label;
  j["public_did"] = public_did ? did_json(*public_did) : json(nullptr);
  j["invitations"] = json::object();
  for (const auto& [id, inv] : invitations) {
    j["invitations"][id] = {{"id", inv.id},
                            {"label", inv.label},
                            {"seed", key_json(inv.key)},
                            {"multi_use", inv.multi_use},
                            {"uses", inv.uses}};
  }
  j["connections"] = json::object();
  for (const auto& [id, c] : connections) {
    j["connections"][id] = {{"id", c.id},
                            {"my_did", c.my_did},
                            {"my_seed", key_json(c.my_key)},
                            {"their_did", c.their_did},
                            {"their_vk", c.their_vk.hex()},
                            {"label", c.label},
                            {"established_at", c.established_at},
                            {"state", c.state},
                            {"invitation_id", c.invitation_id},
                            {"invitation_key", c.invitation_key.hex()},
                            {"request_nonce", c.request_nonce}};
  }
  j["credentials"] = credentials;
  j["records"] = records;
  j["recovery"] = recovery;
  j["seen_message_ids"] = seen_message_ids;
  j["seen_request_nonces"] = seen_request_nonces;
  j["accepted_invitations"] = accepted_invitations;
  j["clock"] = clock;
  return j;
}

WalletStore WalletStore::from_json(const json& j) {
  try {
    WalletStore w;
    w.label = j.at("label").get<std::string>();
    if (!j.at("public_did").is_null()) w.public_did = did_from(j["public_did"]);
    for (const auto& [id, v] : j.at("invitations").items()) {
      w.invitations[id] = {v.at("id").get<std::string>(), v.at("label").get<std::string>(), key_from(v.at("seed")),
                           v.at("multi_use").get<bool>(), v.at("uses").get<int>()};
    }
    for (const auto& [id, v] : j.at("connections").items()) {
      Connection c;
      c.id = v.at("id").get<std::string>();
      c.my_did = v.at("my_did").get<std::string>();
      c.my_key = key_from(v.at("my_seed"));
      c.their_did = v.at("their_did").get<std::string>();
      c.their_vk = crypto::VerificationKey::from_hex(v.at("their_vk").get<std::string>());
      c.label = v.at("label").get<std::string>();
      c.established_at = v.at("established_at").get<std::int64_t>();
      c.state = v.at("state").get<std::string>();
      c.invitation_id = v.at("invitation_id").get<std::string>();
      c.invitation_key = crypto::VerificationKey::from_hex(v.at("invitation_key").get<std::string>());
      c.request_nonce = v.at("request_nonce").get<std::string>();
      w.connections[id] = std::move(c);
    }
    w.credentials = j.at("credentials");
    w.records = j.at("records");
    w.recovery = j.at("recovery");
    w.seen_message_ids = j.at("seen_message_ids").get<std::set<std::string>>();
    w.seen_request_nonces = j.at("seen_request_nonces").get<std::set<std::string>>();
    w.accepted_invitations = j.at("accepted_invitations").get<std::set<std::string>>();
    w.clock = j.at("clock").get<std::int64_t>();
    return w;
  } catch (const json::exception& e) {
    throw Error("bad-wallet", std::string("wallet contents: ") + e.what());
  }
}

std::array<std::uint8_t, 32> derive_wallet_key(std::string_view passphrase, crypto::ByteView salt) {
  crypto::ensure_sodium();
  static_assert(kWalletSaltBytes == crypto_pwhash_SALTBYTES);
  if (salt.size() != kWalletSaltBytes) throw Error("bad-wallet", "bad salt length");
  std::array<std::uint8_t, 32> key{};
  if (crypto_pwhash(key.data(), key.size(), passphrase.data(), passphrase.size(), salt.data(),
                    crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE,
                    crypto_pwhash_ALG_ARGON2ID13) != 0) {
    throw Error("out-of-memory", "key derivation failed");
  }
  return key;
}

crypto::Bytes wallet_save_with_key(const WalletStore& wallet, const std::array<std::uint8_t, 32>& key,
                                   crypto::ByteView salt, crypto::Drbg& rng) {
  crypto::ensure_sodium();
  const auto plain = wallet.to_json().dump();
  const auto nonce = rng.bytes(crypto_secretbox_NONCEBYTES);
  crypto::Bytes out = crypto::to_bytes(kWalletMagic);
  crypto::append(out, salt);
  crypto::append(out, nonce);
  const auto off = out.size();
  out.resize(off + plain.size() + crypto_secretbox_MACBYTES);
  crypto_secretbox_easy(out.data() + off, reinterpret_cast<const std::uint8_t*>(plain.data()), plain.size(),
                        nonce.data(), key.data());
  return out;
}

crypto::Bytes wallet_save(const WalletStore& wallet, std::string_view passphrase, crypto::Drbg& rng) {
  const auto salt = rng.bytes(kWalletSaltBytes);
  auto key = derive_wallet_key(passphrase, salt);
  auto out = wallet_save_with_key(wallet, key, salt, rng);
  sodium_memzero(key.data(), key.size());
  return out;
}

crypto::Bytes wallet_salt(crypto::ByteView sealed) {
  const auto header = kWalletMagic.size() + kWalletSaltBytes + crypto_secretbox_NONCEBYTES;
  if (sealed.size() < header + crypto_secretbox_MACBYTES ||
      crypto::to_string(sealed.first(kWalletMagic.size())) != kWalletMagic) {
    throw Error("bad-wallet", "not a wallet file");
  }
  const auto s = sealed.subspan(kWalletMagic.size(), kWalletSaltBytes);
  return {s.begin(), s.end()};
}

WalletStore wallet_load_with_key(crypto::ByteView sealed, const std::array<std::uint8_t, 32>& key) {
  wallet_salt(sealed);  // header check
  const auto nonce = sealed.subspan(kWalletMagic.size() + kWalletSaltBytes, crypto_secretbox_NONCEBYTES);
  const auto body = sealed.subspan(kWalletMagic.size() + kWalletSaltBytes + crypto_secretbox_NONCEBYTES);
  std::string plain(body.size() - crypto_secretbox_MACBYTES, '\0');
  if (crypto_secretbox_open_easy(reinterpret_cast<std::uint8_t*>(plain.data()), body.data(), body.size(),
                                 nonce.data(), key.data()) != 0) {
    throw Error("auth-failed", "wrong passphrase or modified wallet");
  }
  try {
    return WalletStore::from_json(json::parse(plain));
  } catch (const json::exception& e) {
    throw Error("bad-wallet", e.what());
  }
}

WalletStore wallet_load(crypto::ByteView sealed, std::string_view passphrase) {
  auto key = derive_wallet_key(passphrase, wallet_salt(sealed));
  try {
    auto w = wallet_load_with_key(sealed, key);
    sodium_memzero(key.data(), key.size());
    return w;
  } catch (...) {
    sodium_memzero(key.data(), key.size());
    throw;
  }
}

}  // namespace omic::agent
