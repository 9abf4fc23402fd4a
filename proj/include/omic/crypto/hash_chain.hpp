#pragma once

#include <cstdint>
#include <string>

#include "omic/crypto/digest.hpp"

namespace omic::crypto {

inline constexpr std::int64_t kMaxChainLength = 1 << 16;

// Public end of a value chain: anchor = H^v_max(seed).
struct ChainAnchor {
  std::string attr_name;
  std::int64_t v_max = 0;
  Digest32 anchor;
  bool operator==(const ChainAnchor&) const = default;
};

struct ChainIssue {
  Digest32 holder_token;  // H^(v_max - value)(seed); private to the holder
  ChainAnchor anchor;
};

// Throws omic::Error("out-of-range") unless 0 <= value <= v_max <= 2^16.
ChainIssue chain_issue(const Digest32& seed, std::string attr_name, std::int64_t value,
                       std::int64_t v_max);

// proof = H^(value - threshold)(holder_token). Throws
// omic::Error("cannot-satisfy") when value < threshold.
Digest32 threshold_prove(const Digest32& holder_token, std::int64_t value, std::int64_t threshold);

// H^threshold(proof) == anchor; false for threshold outside [0, v_max].
bool threshold_verify(const ChainAnchor& anchor, std::int64_t threshold, const Digest32& proof);

}  // namespace omic::crypto
