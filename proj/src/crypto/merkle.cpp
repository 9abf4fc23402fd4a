#include "omic/crypto/merkle.hpp"

#include "omic/error.hpp"

namespace omic::crypto {

Digest32 merkle_leaf_hash(const Digest32& leaf) { return hash_tagged("leaf", {leaf.view()}); }

Digest32 merkle_node_hash(const Digest32& left, const Digest32& right) {
  return hash_tagged("node", {left.view(), right.view()});
}

namespace {

std::vector<Digest32> next_level(const std::vector<Digest32>& level) {
  std::vector<Digest32> up;
  up.reserve((level.size() + 1) / 2);
  for (std::size_t i = 0; i < level.size(); i += 2) {
    const auto& right = i + 1 < level.size() ? level[i + 1] : level[i];
    up.push_back(merkle_node_hash(level[i], right));
  }
  return up;
}

std::vector<Digest32> leaf_level(std::span<const Digest32> leaves) {
  if (leaves.empty()) throw Error("empty-tree", "merkle tree needs at least one leaf");
  std::vector<Digest32> level;
  level.reserve(leaves.size());
  for (const auto& l : leaves) level.push_back(merkle_leaf_hash(l));
  return level;
}

}  // namespace

Digest32 merkle_root(std::span<const Digest32> leaves) {
  auto level = leaf_level(leaves);
  while (level.size() > 1) level = next_level(level);
  return level.front();
}

MerklePath merkle_prove(std::span<const Digest32> leaves, std::size_t index) {
  if (index >= leaves.size()) throw Error("index-out-of-range", "merkle leaf index out of range");
  auto level = leaf_level(leaves);
  MerklePath path{index, {}};
  std::size_t pos = index;
  while (level.size() > 1) {
    if (pos % 2 == 0) {
      const auto& sib = pos + 1 < level.size() ? level[pos + 1] : level[pos];
      path.siblings.push_back({Side::kRight, sib});
    } else {
      path.siblings.push_back({Side::kLeft, level[pos - 1]});
    }
    level = next_level(level);
    pos /= 2;
  }
  return path;
}

bool merkle_verify(const Digest32& root, const Digest32& leaf, const MerklePath& path) {
  // The sides must agree with leaf_index so a proof cannot be replayed at
  // another position.
  Digest32 cur = merkle_leaf_hash(leaf);
  std::size_t pos = path.leaf_index;
  for (const auto& step : path.siblings) {
    const bool expect_right = pos % 2 == 0;
    if ((step.side == Side::kRight) != expect_right) return false;
    cur = expect_right ? merkle_node_hash(cur, step.digest) : merkle_node_hash(step.digest, cur);
    pos /= 2;
  }
  return pos == 0 && cur == root;
}

}  // namespace omic::crypto
