#pragma once

#include <array>
#include <compare>
#include <string>

#include "omic/crypto/bytes.hpp"

namespace omic::crypto {

struct VerificationKey {
  std::array<std::uint8_t, 32> bytes{};
  ByteView view() const { return {bytes.data(), bytes.size()}; }
  std::string hex() const { return to_hex(view()); }
  std::string base58() const { return to_base58(view()); }
  static VerificationKey from_hex(std::string_view hex);
  static VerificationKey from_base58(std::string_view b58);
  auto operator<=>(const VerificationKey&) const = default;
};

struct Signature {
  std::array<std::uint8_t, 64> bytes{};
  ByteView view() const { return {bytes.data(), bytes.size()}; }
  std::string hex() const { return to_hex(view()); }
  // Throws omic::Error("bad-signature-encoding").
  static Signature from_hex(std::string_view hex);
  auto operator<=>(const Signature&) const = default;
};

// Ed25519. The signing key is the 32-byte seed; the expanded libsodium
// secret key is rebuilt on demand and wiped afterwards.
class KeyPair {
 public:
  // Throws omic::Error("bad-seed-length") unless seed has 32 bytes.
  static KeyPair from_seed(ByteView seed);

  const VerificationKey& verification_key() const { return vk_; }
  // Only for sealing into an encrypted wallet.
  const std::array<std::uint8_t, 32>& signing_key() const { return seed_; }

  Signature sign(ByteView message) const;

  // X25519 keys derived from this Ed25519 pair for envelope key agreement.
  std::array<std::uint8_t, 32> curve_secret() const;

  bool operator==(const KeyPair& o) const { return vk_ == o.vk_; }

 private:
  std::array<std::uint8_t, 32> seed_{};
  VerificationKey vk_;
};

KeyPair generate_keypair(ByteView seed);

// Never throws; malformed keys or signatures verify as false.
bool verify(const VerificationKey& vk, ByteView message, const Signature& sig);

// Returns false for keys that are not valid curve points.
bool curve_public(const VerificationKey& vk, std::array<std::uint8_t, 32>& out);

}  // namespace omic::crypto
