#pragma once

// Data-parallel batch kernels. Each kernel has a serial reference and an
// OpenMP variant with identical output order; tests compare the two and the
// benchmark target times them against each other.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omic/crypto/digest.hpp"
#include "omic/crypto/hash_chain.hpp"

namespace omic::parallel {

struct PredicateCase {
  crypto::ChainAnchor anchor;
  std::int64_t threshold = 0;
  crypto::Digest32 proof;
};

std::vector<std::uint8_t> verify_predicates_serial(std::span<const PredicateCase> cases);
std::vector<std::uint8_t> verify_predicates_omp(std::span<const PredicateCase> cases);

std::vector<crypto::Digest32> hash_leaves_serial(std::span<const crypto::Digest32> leaves);
std::vector<crypto::Digest32> hash_leaves_omp(std::span<const crypto::Digest32> leaves);

struct Document {
  std::string location;  // e.g. "block 3" or "advert advert-1"
  std::string text;
};

struct Match {
  std::string location;
  std::string needle;
  bool operator==(const Match&) const = default;
};

// One Match per (document, needle) pair where the needle occurs, ordered by
// document then needle.
std::vector<Match> scan_substrings_serial(std::span<const Document> docs,
                                          std::span<const std::string> needles);
std::vector<Match> scan_substrings_omp(std::span<const Document> docs,
                                       std::span<const std::string> needles);

int max_threads();

}  // namespace omic::parallel
