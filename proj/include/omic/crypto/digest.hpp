#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "omic/crypto/bytes.hpp"

namespace omic::crypto {

// 32-byte SHA-256 output. Serialized as 64 lowercase hex characters.
struct Digest32 {
  std::array<std::uint8_t, 32> bytes{};

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  std::string hex() const { return to_hex(view()); }
  bool is_zero() const;

  static Digest32 from_hex(std::string_view hex);
  static Digest32 from_bytes(ByteView b);

  auto operator<=>(const Digest32&) const = default;
};

Digest32 hash(ByteView data);
inline Digest32 hash(std::string_view data) { return hash(as_bytes(data)); }

// H(tag || part_0 || part_1 ...), raw concatenation; callers insert their own
// separators where the grammar needs them.
Digest32 hash_tagged(std::string_view tag, std::initializer_list<ByteView> parts);

// H^n(x): n-fold iteration of the hash on a 32-byte value; H^0(x) = x.
Digest32 hash_iterate(const Digest32& x, std::uint64_t n);

void ensure_sodium();

}  // namespace omic::crypto
