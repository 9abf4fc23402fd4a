#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "omic/crypto/drbg.hpp"
#include "omic/crypto/signature.hpp"

namespace omic::agent {

enum class EnvelopeMode { kAuthcrypt, kAnoncrypt };

struct Envelope {
  std::string to;  // base58 verification key of the recipient
  EnvelopeMode mode = EnvelopeMode::kAuthcrypt;
  crypto::Bytes nonce;
  crypto::Bytes ciphertext;

  nlohmann::json to_json() const;  // {to, mode, nonce_b64, ciphertext_b64}
  // Throws omic::Error("malformed").
  static Envelope from_json(const nlohmann::json& j);
};

struct Unpacked {
  std::optional<crypto::VerificationKey> sender;  // empty for anoncrypt
  crypto::Bytes payload;
};

// X25519 key agreement on keys converted from the Ed25519 pairs, with
// XSalsa20-Poly1305 boxes. An ephemeral key wraps every envelope; authcrypt
// additionally nests a box from the sender's static key so the recipient can
// authenticate the sender. The mode byte and recipient key are bound inside
// the outer box.
Envelope pack_authcrypt(const crypto::KeyPair& sender, const crypto::VerificationKey& recipient,
                        crypto::ByteView payload, crypto::Drbg& rng);
Envelope pack_anoncrypt(const crypto::VerificationKey& recipient, crypto::ByteView payload, crypto::Drbg& rng);

// Throws omic::Error("wrong-recipient"), ("auth-failed") or ("malformed").
Unpacked unpack(const crypto::KeyPair& recipient, const Envelope& envelope);

}  // namespace omic::agent
