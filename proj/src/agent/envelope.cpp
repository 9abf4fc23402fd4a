#include "omic/agent/envelope.hpp"

#include <sodium.h>

#include "omic/error.hpp"

namespace omic::agent {

namespace {

constexpr std::uint8_t kAuthTag = 0xa1;
constexpr std::uint8_t kAnonTag = 0xa2;

std::array<std::uint8_t, 32> recipient_curve(const crypto::VerificationKey& vk) {
  std::array<std::uint8_t, 32> pk{};
  if (!crypto::curve_public(vk, pk)) throw Error("wrong-recipient", "recipient key is not a valid point");
  return pk;
}

crypto::Bytes box(crypto::ByteView msg, crypto::ByteView nonce, const std::uint8_t* pk, const std::uint8_t* sk) {
  crypto::Bytes out(msg.size() + crypto_box_MACBYTES);
  if (crypto_box_easy(out.data(), msg.data(), msg.size(), nonce.data(), pk, sk) != 0) {
    throw Error("auth-failed", "box failed");
  }
  return out;
}

crypto::Bytes unbox(crypto::ByteView c, crypto::ByteView nonce, const std::uint8_t* pk, const std::uint8_t* sk) {
  if (c.size() < crypto_box_MACBYTES) throw Error("auth-failed", "ciphertext too short");
  crypto::Bytes out(c.size() - crypto_box_MACBYTES);
  if (crypto_box_open_easy(out.data(), c.data(), c.size(), nonce.data(), pk, sk) != 0) {
    throw Error("auth-failed", "authentication failed");
  }
  return out;
}

Envelope seal(const crypto::VerificationKey& recipient, EnvelopeMode mode, crypto::ByteView inner,
              crypto::Drbg& rng) {
  crypto::ensure_sodium();
  const auto rpk = recipient_curve(recipient);
  std::array<std::uint8_t, 32> epk{}, esk{};
  const auto eseed = rng.bytes(crypto_box_SEEDBYTES);
  crypto_box_seed_keypair(epk.data(), esk.data(), eseed.data());

  crypto::Bytes plain{mode == EnvelopeMode::kAuthcrypt ? kAuthTag : kAnonTag};
  crypto::append(plain, recipient.view());
  // X25519 ignores the top bit of a public key, so the exact ephemeral key
  // bytes are repeated under the MAC.
  crypto::append(plain, crypto::ByteView(epk.data(), epk.size()));
  crypto::append(plain, inner);

  Envelope e;
  e.to = recipient.base58();
  e.mode = mode;
  e.nonce = rng.bytes(crypto_box_NONCEBYTES);
  e.ciphertext.assign(epk.begin(), epk.end());
  crypto::append(e.ciphertext, box(plain, e.nonce, rpk.data(), esk.data()));
  sodium_memzero(esk.data(), esk.size());
  return e;
}

}  // namespace

nlohmann::json Envelope::to_json() const {
  return {{"to", to},
          {"mode", mode == EnvelopeMode::kAuthcrypt ? "authcrypt" : "anoncrypt"},
          {"nonce_b64", crypto::to_base64(nonce)},
          {"ciphertext_b64", crypto::to_base64(ciphertext)}};
}

Envelope Envelope::from_json(const nlohmann::json& j) {
  try {
    Envelope e;
    e.to = j.at("to").get<std::string>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "authcrypt") {
      e.mode = EnvelopeMode::kAuthcrypt;
    } else if (mode == "anoncrypt") {
      e.mode = EnvelopeMode::kAnoncrypt;
    } else {
      throw Error("malformed", "unknown envelope mode");
    }
    e.nonce = crypto::from_base64(j.at("nonce_b64").get<std::string>());
    e.ciphertext = crypto::from_base64(j.at("ciphertext_b64").get<std::string>());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error("malformed", std::string("envelope: ") + ex.what());
  } catch (const Error& ex) {
    throw Error("malformed", std::string("envelope: ") + ex.what());
  }
}

Envelope pack_authcrypt(const crypto::KeyPair& sender, const crypto::VerificationKey& recipient,
                        crypto::ByteView payload, crypto::Drbg& rng) {
  crypto::ensure_sodium();
  const auto rpk = recipient_curve(recipient);
  auto ssk = sender.curve_secret();
  const auto nonce2 = rng.bytes(crypto_box_NONCEBYTES);
  crypto::Bytes inner(sender.verification_key().bytes.begin(), sender.verification_key().bytes.end());
  crypto::append(inner, nonce2);
  crypto::append(inner, box(payload, nonce2, rpk.data(), ssk.data()));
  sodium_memzero(ssk.data(), ssk.size());
  return seal(recipient, EnvelopeMode::kAuthcrypt, inner, rng);
}

Envelope pack_anoncrypt(const crypto::VerificationKey& recipient, crypto::ByteView payload, crypto::Drbg& rng) {
  return seal(recipient, EnvelopeMode::kAnoncrypt, payload, rng);
}

Unpacked unpack(const crypto::KeyPair& recipient, const Envelope& e) {
  crypto::ensure_sodium();
  if (e.to != recipient.verification_key().base58()) throw Error("wrong-recipient", "envelope addressed elsewhere");
  if (e.nonce.size() != crypto_box_NONCEBYTES) throw Error("malformed", "bad nonce length");
  if (e.ciphertext.size() < 32 + crypto_box_MACBYTES) throw Error("malformed", "truncated envelope");
  auto rsk = recipient.curve_secret();
  const crypto::ByteView c(e.ciphertext);
  crypto::Bytes plain;
  try {
    plain = unbox(c.subspan(32), e.nonce, c.data(), rsk.data());
  } catch (...) {
    sodium_memzero(rsk.data(), rsk.size());
    throw;
  }
  const std::uint8_t want = e.mode == EnvelopeMode::kAuthcrypt ? kAuthTag : kAnonTag;
  if (plain.size() < 65 || plain[0] != want ||
      !std::equal(plain.begin() + 1, plain.begin() + 33, recipient.verification_key().bytes.begin()) ||
      !std::equal(plain.begin() + 33, plain.begin() + 65, e.ciphertext.begin())) {
    sodium_memzero(rsk.data(), rsk.size());
    throw Error("auth-failed", "envelope header mismatch");
  }
  const crypto::ByteView inner = crypto::ByteView(plain).subspan(65);
  Unpacked out;
  if (e.mode == EnvelopeMode::kAnoncrypt) {
    out.payload.assign(inner.begin(), inner.end());
  } else {
    if (inner.size() < 32 + crypto_box_NONCEBYTES + crypto_box_MACBYTES) {
      sodium_memzero(rsk.data(), rsk.size());
      throw Error("auth-failed", "truncated authcrypt body");
    }
    crypto::VerificationKey svk;
    std::copy(inner.begin(), inner.begin() + 32, svk.bytes.begin());
    std::array<std::uint8_t, 32> spk{};
    if (!crypto::curve_public(svk, spk)) {
      sodium_memzero(rsk.data(), rsk.size());
      throw Error("auth-failed", "sender key is not a valid point");
    }
    try {
      out.payload = unbox(inner.subspan(32 + crypto_box_NONCEBYTES), inner.subspan(32, crypto_box_NONCEBYTES),
                          spk.data(), rsk.data());
    } catch (...) {
      sodium_memzero(rsk.data(), rsk.size());
      throw;
    }
    out.sender = svk;
  }
  sodium_memzero(rsk.data(), rsk.size());
  return out;
}

}  // namespace omic::agent
