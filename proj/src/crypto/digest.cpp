#include "omic/crypto/digest.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

#include "omic/error.hpp"

namespace omic::crypto {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialisation failed");
}

bool Digest32::is_zero() const {
  return std::all_of(bytes.begin(), bytes.end(), [](auto b) { return b == 0; });
}

Digest32 Digest32::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw Error("bad-digest", "digest hex must be 64 characters");
  return from_bytes(crypto::from_hex(hex));
}

Digest32 Digest32::from_bytes(ByteView b) {
  if (b.size() != 32) throw Error("bad-digest", "digest must be 32 bytes");
  Digest32 d;
  std::copy(b.begin(), b.end(), d.bytes.begin());
  return d;
}

Digest32 hash(ByteView data) {
  Digest32 d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

Digest32 hash_tagged(std::string_view tag, std::initializer_list<ByteView> parts) {
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(tag.data()), tag.size());
  for (auto p : parts) crypto_hash_sha256_update(&st, p.data(), p.size());
  Digest32 d;
  crypto_hash_sha256_final(&st, d.bytes.data());
  return d;
}

Digest32 hash_iterate(const Digest32& x, std::uint64_t n) {
  Digest32 cur = x;
  for (std::uint64_t i = 0; i < n; ++i) {
    crypto_hash_sha256(cur.bytes.data(), cur.bytes.data(), cur.bytes.size());
  }
  return cur;
}

}  // namespace omic::crypto
