#include "omic/crypto/drbg.hpp"

#include <stdexcept>

namespace omic::crypto {

Drbg::Drbg(std::uint64_t seed) {
  Bytes b;
  append_u64(b, seed);
  seed_ = hash_tagged("drbg-seed", {b});
}

Digest32 Drbg::next_block() {
  Bytes ctr;
  append_u64(ctr, counter_++);
  return hash_tagged("drbg", {seed_.view(), ctr});
}

Bytes Drbg::bytes(std::size_t n) {
  Bytes out;
  out.reserve(n + 32);
  while (out.size() < n) append(out, next_block().view());
  out.resize(n);
  return out;
}

Digest32 Drbg::digest() { return next_block(); }

std::uint64_t Drbg::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  while (true) {
    auto b = next_block();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | b.bytes[i];
    if (v < limit) return v % bound;
  }
}

Drbg Drbg::fork(std::string_view label) const {
  return Drbg(hash_tagged("drbg-fork", {seed_.view(), as_bytes(label)}));
}

}  // namespace omic::crypto
