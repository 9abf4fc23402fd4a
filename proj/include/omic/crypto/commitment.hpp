#pragma once

#include <array>
#include <string>
#include <string_view>

#include "omic/crypto/digest.hpp"

namespace omic::crypto {

using Salt = std::array<std::uint8_t, 16>;

struct Commitment {
  std::string attr_name;
  Digest32 digest;
};

// digest = H("attr" || name || 0x00 || value || 0x00 || salt).
// Throws omic::Error("empty-attr-name").
Commitment commit_attribute(std::string_view attr_name, std::string_view canonical_value,
                            const Salt& salt);

// Recomputes the commitment from an opening and compares digests.
bool open_matches(const Commitment& c, std::string_view canonical_value, const Salt& salt);

Salt salt_from_hex(std::string_view hex);

}  // namespace omic::crypto
