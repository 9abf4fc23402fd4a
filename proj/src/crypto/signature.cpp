#include "omic/crypto/signature.hpp"

#include <sodium.h>

#include <algorithm>

#include "omic/crypto/digest.hpp"
#include "omic/error.hpp"

namespace omic::crypto {

VerificationKey VerificationKey::from_hex(std::string_view hex) {
  auto b = crypto::from_hex(hex);
  if (b.size() != 32) throw Error("bad-key", "verification key must be 32 bytes");
  VerificationKey vk;
  std::copy(b.begin(), b.end(), vk.bytes.begin());
  return vk;
}

VerificationKey VerificationKey::from_base58(std::string_view b58) {
  auto b = crypto::from_base58(b58);
  if (b.size() != 32) throw Error("bad-key", "verification key must be 32 bytes");
  VerificationKey vk;
  std::copy(b.begin(), b.end(), vk.bytes.begin());
  return vk;
}

Signature Signature::from_hex(std::string_view hex) {
  Bytes b;
  try {
    b = crypto::from_hex(hex);
  } catch (const Error&) {
    throw Error("bad-signature-encoding", "signature is not hex");
  }
  if (b.size() != 64) throw Error("bad-signature-encoding", "signature must be 64 bytes");
  Signature s;
  std::copy(b.begin(), b.end(), s.bytes.begin());
  return s;
}

KeyPair KeyPair::from_seed(ByteView seed) {
  if (seed.size() != crypto_sign_SEEDBYTES) {
    throw Error("bad-seed-length", "keypair seed must be 32 bytes");
  }
  ensure_sodium();
  KeyPair kp;
  std::copy(seed.begin(), seed.end(), kp.seed_.begin());
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
  crypto_sign_seed_keypair(kp.vk_.bytes.data(), sk.data(), kp.seed_.data());
  sodium_memzero(sk.data(), sk.size());
  return kp;
}

KeyPair generate_keypair(ByteView seed) { return KeyPair::from_seed(seed); }

Signature KeyPair::sign(ByteView message) const {
  std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
  crypto_sign_seed_keypair(pk.data(), sk.data(), seed_.data());
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk.data());
  sodium_memzero(sk.data(), sk.size());
  return sig;
}

std::array<std::uint8_t, 32> KeyPair::curve_secret() const {
  std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
  crypto_sign_seed_keypair(pk.data(), sk.data(), seed_.data());
  std::array<std::uint8_t, 32> out{};
  crypto_sign_ed25519_sk_to_curve25519(out.data(), sk.data());
  sodium_memzero(sk.data(), sk.size());
  return out;
}

bool verify(const VerificationKey& vk, ByteView message, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     vk.bytes.data()) == 0;
}

bool curve_public(const VerificationKey& vk, std::array<std::uint8_t, 32>& out) {
  return crypto_sign_ed25519_pk_to_curve25519(out.data(), vk.bytes.data()) == 0;
}

}  // namespace omic::crypto
