#pragma once

#include <string>

#include "omic/crypto/drbg.hpp"
#include "omic/crypto/signature.hpp"

namespace omic::agent {

enum class Visibility { kPublic, kPairwise };

std::string to_string(Visibility v);
Visibility visibility_from_string(std::string_view s);

struct Did {
  std::string id;  // did:omic:<base58>
  crypto::KeyPair key;
  Visibility visibility = Visibility::kPairwise;
};

// Fresh key pair from rng; the identifier derives from the verification key.
Did create_did(crypto::Drbg& rng, Visibility visibility);

}  // namespace omic::agent
