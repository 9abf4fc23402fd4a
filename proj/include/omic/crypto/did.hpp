#pragma once

#include <string>
#include <string_view>

#include "omic/crypto/signature.hpp"

namespace omic::crypto {

inline constexpr std::string_view kDidPrefix = "did:omic:";

// "did:omic:" + base58(first 16 bytes of H(verification_key)).
std::string did_from_verkey(const VerificationKey& vk);

}  // namespace omic::crypto
