#include "omic/crypto/did.hpp"

#include "omic/crypto/digest.hpp"

namespace omic::crypto {

std::string did_from_verkey(const VerificationKey& vk) {
  auto d = hash(vk.view());
  return std::string(kDidPrefix) + to_base58(ByteView(d.bytes.data(), 16));
}

}  // namespace omic::crypto
