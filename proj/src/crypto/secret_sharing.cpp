#include "omic/crypto/secret_sharing.hpp"

#include <array>
#include <set>

#include "omic/error.hpp"

namespace omic::crypto {

namespace gf256 {

namespace {

// Log/antilog tables for the AES field (x^8 + x^4 + x^3 + x + 1), generator 3.
struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};
  Tables() {
    std::uint8_t x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = x;
      log[x] = static_cast<std::uint8_t>(i);
      // multiply by 3 = x * 2 ^ x
      std::uint8_t x2 = static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0));
      x = static_cast<std::uint8_t>(x2 ^ x);
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const auto& t = tables();
  return t.exp[t.log[a] + t.log[b]];
}

std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw Error("bad-parameters", "zero has no inverse in GF(256)");
  const auto& t = tables();
  return t.exp[255 - t.log[a]];
}

}  // namespace gf256

std::vector<SecretShare> share_split(ByteView secret, int k, int n, Drbg& rng) {
  if (k < 1 || k > n || n > kMaxShares) {
    throw Error("bad-parameters", "need 1 <= k <= n <= 16");
  }
  if (secret.size() > kMaxSecretBytes) {
    throw Error("bad-parameters", "secret longer than 64 bytes");
  }
  const Digest32 checksum = hash(secret);
  std::vector<SecretShare> shares(n);
  for (int i = 0; i < n; ++i) {
    shares[i].index = i + 1;
    shares[i].threshold = k;
    shares[i].checksum = checksum;
    shares[i].payload.resize(secret.size());
  }
  for (std::size_t b = 0; b < secret.size(); ++b) {
    // coefficients[0] is the secret byte
    Bytes coeffs = rng.bytes(static_cast<std::size_t>(k));
    coeffs[0] = secret[b];
    for (int i = 0; i < n; ++i) {
      const auto x = static_cast<std::uint8_t>(i + 1);
      std::uint8_t y = 0;
      for (int c = k - 1; c >= 0; --c) y = static_cast<std::uint8_t>(gf256::mul(y, x) ^ coeffs[c]);
      shares[i].payload[b] = y;
    }
  }
  return shares;
}

Bytes share_combine(std::span<const SecretShare> shares) {
  if (shares.empty()) throw Error("insufficient-shares", "no shares supplied");
  const int k = shares.front().threshold;
  const auto len = shares.front().payload.size();
  std::set<int> seen;
  for (const auto& s : shares) {
    if (s.threshold != k || s.payload.size() != len || s.checksum != shares.front().checksum) {
      throw Error("inconsistent-shares", "shares come from different splits");
    }
    if (s.index < 1 || s.index > 255) throw Error("inconsistent-shares", "share index out of range");
    if (!seen.insert(s.index).second) throw Error("duplicate-share", "duplicate share index");
  }
  if (static_cast<int>(shares.size()) < k) {
    throw Error("insufficient-shares", "need " + std::to_string(k) + " shares, got " +
                                           std::to_string(shares.size()));
  }

  // Lagrange interpolation at x = 0 over the first k shares.
  Bytes secret(len, 0);
  for (int j = 0; j < k; ++j) {
    const auto xj = static_cast<std::uint8_t>(shares[j].index);
    std::uint8_t num = 1, den = 1;
    for (int m = 0; m < k; ++m) {
      if (m == j) continue;
      const auto xm = static_cast<std::uint8_t>(shares[m].index);
      num = gf256::mul(num, xm);
      den = gf256::mul(den, static_cast<std::uint8_t>(xm ^ xj));
    }
    const auto coeff = gf256::mul(num, gf256::inv(den));
    for (std::size_t b = 0; b < len; ++b) secret[b] ^= gf256::mul(shares[j].payload[b], coeff);
  }
  if (hash(secret) != shares.front().checksum) {
    throw Error("checksum-mismatch", "reconstructed secret fails checksum");
  }
  return secret;
}

}  // namespace omic::crypto
