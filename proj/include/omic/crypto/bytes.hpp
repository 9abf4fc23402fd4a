#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace omic::crypto {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  auto v = as_bytes(s);
  return {v.begin(), v.end()};
}

inline std::string to_string(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

inline void append(Bytes& out, ByteView in) { out.insert(out.end(), in.begin(), in.end()); }
inline void append(Bytes& out, std::string_view in) { append(out, as_bytes(in)); }

// Big-endian fixed-width encoding, used wherever integers enter a hash.
void append_u64(Bytes& out, std::uint64_t v);

std::string to_hex(ByteView b);
// Throws omic::Error("bad-hex") on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

std::string to_base58(ByteView b);
Bytes from_base58(std::string_view s);

std::string to_base64(ByteView b);
// Throws omic::Error("bad-base64").
Bytes from_base64(std::string_view s);

// Constant-time comparison for secrets and MACs.
bool equal_ct(ByteView a, ByteView b);

}  // namespace omic::crypto
