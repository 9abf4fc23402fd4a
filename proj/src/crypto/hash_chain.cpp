#include "omic/crypto/hash_chain.hpp"

#include "omic/error.hpp"

namespace omic::crypto {

ChainIssue chain_issue(const Digest32& seed, std::string attr_name, std::int64_t value,
                       std::int64_t v_max) {
  if (v_max < 0 || v_max > kMaxChainLength) {
    throw Error("out-of-range", "v_max must lie in [0, 2^16]");
  }
  if (value < 0 || value > v_max) {
    throw Error("out-of-range", "value " + std::to_string(value) + " outside [0, " +
                                    std::to_string(v_max) + "] for " + attr_name);
  }
  ChainIssue out;
  out.holder_token = hash_iterate(seed, static_cast<std::uint64_t>(v_max - value));
  out.anchor = {std::move(attr_name), v_max,
                hash_iterate(out.holder_token, static_cast<std::uint64_t>(value))};
  return out;
}

Digest32 threshold_prove(const Digest32& holder_token, std::int64_t value, std::int64_t threshold) {
  if (threshold < 0) throw Error("out-of-range", "threshold must be non-negative");
  if (value < threshold) {
    throw Error("cannot-satisfy", "value does not meet threshold " + std::to_string(threshold));
  }
  return hash_iterate(holder_token, static_cast<std::uint64_t>(value - threshold));
}

bool threshold_verify(const ChainAnchor& anchor, std::int64_t threshold, const Digest32& proof) {
  if (threshold < 0 || threshold > anchor.v_max || anchor.v_max > kMaxChainLength) return false;
  return hash_iterate(proof, static_cast<std::uint64_t>(threshold)) == anchor.anchor;
}

}  // namespace omic::crypto
