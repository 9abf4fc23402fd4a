#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "omic/crypto/digest.hpp"

namespace omic::crypto {

enum class Side { kLeft, kRight };

struct MerkleStep {
  Side side;  // where the sibling sits relative to the running hash
  Digest32 digest;
  bool operator==(const MerkleStep&) const = default;
};

struct MerklePath {
  std::size_t leaf_index = 0;
  std::vector<MerkleStep> siblings;
  bool operator==(const MerklePath&) const = default;
};

// Leaf nodes are H("leaf" || L); internal nodes H("node" || left || right);
// an odd level duplicates its last node. Throws omic::Error("empty-tree").
Digest32 merkle_root(std::span<const Digest32> leaves);

// Throws omic::Error("index-out-of-range") / ("empty-tree").
MerklePath merkle_prove(std::span<const Digest32> leaves, std::size_t index);

bool merkle_verify(const Digest32& root, const Digest32& leaf, const MerklePath& path);

Digest32 merkle_leaf_hash(const Digest32& leaf);
Digest32 merkle_node_hash(const Digest32& left, const Digest32& right);

}  // namespace omic::crypto
