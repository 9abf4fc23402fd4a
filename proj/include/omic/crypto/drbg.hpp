#pragma once

#include <cstdint>
#include <string_view>

#include "omic/crypto/digest.hpp"

namespace omic::crypto {

// Deterministic byte source: block i = SHA-256("drbg" || seed || i).
// Every random choice in a scenario flows from one of these so that equal
// seeds give byte-identical runs. Not a substitute for an OS CSPRNG outside
// the simulator.
class Drbg {
 public:
  explicit Drbg(const Digest32& seed) : seed_(seed) {}
  explicit Drbg(std::uint64_t seed);

  Bytes bytes(std::size_t n);
  Digest32 digest();
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);

  // Independent child stream; equal labels give equal children.
  Drbg fork(std::string_view label) const;

 private:
  Digest32 next_block();

  Digest32 seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace omic::crypto
