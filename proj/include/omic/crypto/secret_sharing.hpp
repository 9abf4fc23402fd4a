#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "omic/crypto/digest.hpp"
#include "omic/crypto/drbg.hpp"

namespace omic::crypto {

inline constexpr int kMaxShares = 16;
inline constexpr std::size_t kMaxSecretBytes = 64;

// One point of a byte-wise k-of-n polynomial sharing over GF(2^8).
struct SecretShare {
  int index = 0;      // evaluation point, 1..n
  int threshold = 0;  // k
  Bytes payload;      // one evaluation per secret byte
  Digest32 checksum;  // H(secret)
  bool operator==(const SecretShare&) const = default;
};

// Throws omic::Error("bad-parameters") unless 1 <= k <= n <= 16 and
// the secret is at most 64 bytes.
std::vector<SecretShare> share_split(ByteView secret, int k, int n, Drbg& rng);

// Throws omic::Error with code "duplicate-share", "insufficient-shares",
// "inconsistent-shares" or "checksum-mismatch".
Bytes share_combine(std::span<const SecretShare> shares);

namespace gf256 {
std::uint8_t mul(std::uint8_t a, std::uint8_t b);
std::uint8_t inv(std::uint8_t a);
}  // namespace gf256

}  // namespace omic::crypto
