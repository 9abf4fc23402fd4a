#include "omic/agent/did.hpp"

#include "omic/crypto/did.hpp"
#include "omic/error.hpp"

namespace omic::agent {

std::string to_string(Visibility v) { return v == Visibility::kPublic ? "public" : "pairwise"; }

Visibility visibility_from_string(std::string_view s) {
  if (s == "public") return Visibility::kPublic;
  if (s == "pairwise") return Visibility::kPairwise;
  throw Error("malformed", "unknown visibility");
}

Did create_did(crypto::Drbg& rng, Visibility visibility) {
  auto key = crypto::generate_keypair(rng.bytes(32));
  return {crypto::did_from_verkey(key.verification_key()), key, visibility};
}

}  // namespace omic::agent
