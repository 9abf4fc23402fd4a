#include "omic/crypto/commitment.hpp"

#include <algorithm>

#include "omic/error.hpp"

namespace omic::crypto {

Commitment commit_attribute(std::string_view attr_name, std::string_view canonical_value,
                            const Salt& salt) {
  if (attr_name.empty()) throw Error("empty-attr-name", "attribute name must not be empty");
  static constexpr std::uint8_t kSep[] = {0x00};
  return {std::string(attr_name),
          hash_tagged("attr", {as_bytes(attr_name), kSep, as_bytes(canonical_value), kSep,
                               ByteView(salt.data(), salt.size())})};
}

bool open_matches(const Commitment& c, std::string_view canonical_value, const Salt& salt) {
  if (c.attr_name.empty()) return false;
  return commit_attribute(c.attr_name, canonical_value, salt).digest == c.digest;
}

Salt salt_from_hex(std::string_view hex) {
  auto b = from_hex(hex);
  if (b.size() != 16) throw Error("bad-salt", "salt must be 16 bytes");
  Salt s;
  std::copy(b.begin(), b.end(), s.begin());
  return s;
}

}  // namespace omic::crypto
